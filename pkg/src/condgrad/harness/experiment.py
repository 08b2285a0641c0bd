"""Config-driven experiment runs: dataset + net + optimizer -> CSV and summary."""
import json
import time
from pathlib import Path

from ..constraints import ConstraintSpec, Kind, constraint_value
from ..exceptions import CondGradError
from ..network import error_rate, incidence_matrix, init_network, path_norm, save_network, scale_layers
from ..optim import StepSchedule, path_cg, train_cg, train_pgd, train_sgd
from .data import load_mnist, synthetic_dataset

SUMMARY_NAME = "summary.json"
METRICS_NAME = "metrics.csv"


def build_dataset(cfg):
    kind = cfg["dataset.kind"]
    seed = cfg["seed"]
    if kind == "mnist":
        files = {
            k: cfg[f"dataset.{k}"]
            for k in ("train_images", "train_labels", "test_images", "test_labels")
            if cfg.get(f"dataset.{k}")
        }
        return load_mnist(cfg["dataset.n_train"], cfg["dataset.n_test"], seed=seed, files=files)
    kwargs = {"separation": cfg["dataset.separation"]} if kind == "gaussian_blobs" else {}
    return synthetic_dataset(kind, cfg["dataset.n"], seed=seed, **kwargs)


def layer_sizes(cfg, dataset):
    layers = cfg["net.layers"]
    if layers is None:
        return [dataset.n_features, *cfg["net.hidden"], dataset.n_classes]
    if layers[0] != dataset.n_features or layers[-1] < dataset.n_classes:
        raise CondGradError(
            f"net.layers {layers} incompatible with {dataset.n_features} features / "
            f"{dataset.n_classes} classes"
        )
    return layers


def build_spec(cfg, net):
    if cfg["constraint.kind"] is None:
        return None
    kind = Kind(cfg["constraint.kind"])
    aux = incidence_matrix(net) if kind is Kind.TV else None
    return ConstraintSpec(
        kind, cfg["constraint.lambda"], aux=aux,
        eps=cfg["constraint.eps"], tol=cfg["constraint.tol"], seed=cfg["seed"],
    )


def rescale_into_ball(net, spec):
    """Scale every layer uniformly so that ``R(W) = lam / 2``.

    ``R`` is homogeneous of degree 1 in the weights for every ball except the
    path norm, which has degree ``n_layers``.
    """
    if spec.kind is Kind.PATH_NORM:
        value, degree = path_norm(net), net.n_layers
    else:
        value, degree = constraint_value(net.params, spec), 1
    if value == 0.0:
        return net
    return scale_layers(net, (0.5 * spec.lam / value) ** (1.0 / degree))


def run_experiment(cfg, out_dir=None):
    """Run one configured experiment; returns the path of the metrics CSV.

    Writes ``metrics.csv``, ``summary.json`` and the final ``net.json`` into
    ``out_dir`` (default ``cfg['out']``).
    """
    out = Path(out_dir or cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    context = f"[optim.kind={cfg['optim.kind']} constraint.kind={cfg['constraint.kind']}]"
    t0 = time.perf_counter()
    try:
        ds = build_dataset(cfg)
        net = init_network(layer_sizes(cfg, ds), seed=cfg["seed"])
        spec = build_spec(cfg, net)
        schedule = StepSchedule(cfg["schedule.mode"], cfg["schedule.eta0"], cfg["schedule.burn_in"])
        common = dict(
            T=cfg["optim.iters"], batch_size=cfg["optim.batch_size"], seed=cfg["seed"],
            eval_every=cfg["optim.eval_every"],
        )
        kind = cfg["optim.kind"]
        if kind == "cg":
            net = rescale_into_ball(net, spec)
            net, metrics = train_cg(net, ds.train, ds.test, spec, schedule, **common)
        elif kind == "path_cg":
            net = rescale_into_ball(net, spec)
            net, metrics = path_cg(net, ds.train, ds.test, spec.lam, schedule, **common)
        elif kind == "pgd":
            net, metrics = train_pgd(net, ds.train, ds.test, spec, cfg["optim.lr"], **common)
        else:
            net, metrics = train_sgd(net, ds.train, ds.test, cfg["optim.lr"], spec=spec, **common)
    except CondGradError as err:
        raise type(err)(f"{context} {err}") from err

    if spec is None or spec.kind is Kind.PATH_NORM:
        final_R = path_norm(net)
    else:
        final_R = constraint_value(net.params, spec, net=net)
    summary = {
        "dataset": ds.name,
        "layers": net.layer_sizes,
        "optimizer": cfg["optim.kind"],
        "constraint": cfg["constraint.kind"],
        "lambda": cfg["constraint.lambda"] if spec is not None else None,
        "iterations": len(metrics),
        "final_train_err": error_rate(net, ds.train),
        "final_test_err": error_rate(net, ds.test),
        "final_constraint_value": final_R,
        "total_wall_ms": (time.perf_counter() - t0) * 1e3,
        "notes": metrics.notes[:20],
    }
    csv_path = metrics.to_csv(out / METRICS_NAME)
    with open(out / SUMMARY_NAME, "w") as fh:
        json.dump(summary, fh, indent=2)
    save_network(net, out / "net.json")
    return csv_path
