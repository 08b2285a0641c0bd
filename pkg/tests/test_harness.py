import csv
import gzip
import json

import numpy as np
import pytest

from condgrad.config import parse_config
from condgrad.constraints import ConstraintSpec, LmoResult
from condgrad.exceptions import IdxFormatError
from condgrad.harness import checks
from condgrad.harness.data import MNIST_FILES, load_idx, load_mnist, read_idx, synthetic_dataset, write_idx
from condgrad.harness.experiment import rescale_into_ball, run_experiment
from condgrad.harness.oracles import (
    brute_force_lmo,
    jacobi_eigenvalues,
    l1_vertices,
    linf_vertices,
)
from condgrad.network import init_network, path_norm


# -- IDX -----------------------------------------------------------------------------

def test_idx_round_trip(tmp_path):
    images = np.arange(2 * 3 * 4, dtype=np.uint8).reshape(2, 3, 4)
    labels = np.array([7, 1], dtype=np.uint8)
    for suffix in ("", ".gz"):
        ip, lp = tmp_path / f"img{suffix}", tmp_path / f"lab{suffix}"
        write_idx(ip, images)
        write_idx(lp, labels)
        np.testing.assert_array_equal(read_idx(ip), images)
        batch = load_idx(ip, lp)
        assert batch.inputs.shape == (2, 12)
        np.testing.assert_allclose(batch.inputs[1], images[1].ravel() / 255.0)
        np.testing.assert_array_equal(batch.labels, [7, 1])


def test_idx_header_constants(tmp_path):
    write_idx(tmp_path / "i", np.zeros((1, 2, 2), dtype=np.uint8))
    write_idx(tmp_path / "l", np.zeros(1, dtype=np.uint8))
    assert (tmp_path / "i").read_bytes()[:4] == b"\x00\x00\x08\x03"
    assert (tmp_path / "l").read_bytes()[:4] == b"\x00\x00\x08\x01"


def test_idx_errors(tmp_path):
    empty = tmp_path / "empty"
    empty.write_bytes(b"")
    with pytest.raises(IdxFormatError, match="too short"):
        read_idx(empty)
    bad = tmp_path / "bad"
    bad.write_bytes(b"\x00\x00\x09\x03" + b"\x00" * 16)
    with pytest.raises(IdxFormatError, match="magic"):
        read_idx(bad)
    write_idx(tmp_path / "full", np.zeros((3, 2, 2), dtype=np.uint8))
    trunc = tmp_path / "trunc"
    trunc.write_bytes((tmp_path / "full").read_bytes()[:-3])
    with pytest.raises(IdxFormatError, match="truncated"):
        read_idx(trunc)
    write_idx(tmp_path / "lab", np.zeros(2, dtype=np.uint8))
    with pytest.raises(IdxFormatError, match="mismatch"):
        load_idx(tmp_path / "full", tmp_path / "lab")


def test_gzip_output_is_reproducible(tmp_path):
    a = np.arange(10, dtype=np.uint8)
    write_idx(tmp_path / "a.gz", a)
    write_idx(tmp_path / "b.gz", a)
    assert (tmp_path / "a.gz").read_bytes() == (tmp_path / "b.gz").read_bytes()
    assert gzip.decompress((tmp_path / "a.gz").read_bytes())[:4] == b"\x00\x00\x08\x01"


def test_bundled_mnist_subset():
    train = load_idx(MNIST_FILES["train_images"], MNIST_FILES["train_labels"])
    test = load_idx(MNIST_FILES["test_images"], MNIST_FILES["test_labels"])
    assert train.inputs.shape == (4000, 784) and test.inputs.shape == (1000, 784)
    assert set(np.unique(train.labels)) == set(range(10))
    ds = load_mnist(1000, 1000, seed=0)
    assert len(ds.train) == 1000 and len(ds.test) == 1000
    assert 0.0 <= ds.train.inputs.min() and ds.train.inputs.max() <= 1.0
    again = load_mnist(1000, 1000, seed=0)
    np.testing.assert_array_equal(ds.train.labels, again.train.labels)
    with pytest.raises(ValueError):
        load_mnist(5000, 10)


# -- synthetic data --------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["gaussian_blobs", "two_spirals"])
def test_synthetic_deterministic_balanced_disjoint(kind):
    a, b = synthetic_dataset(kind, 101, seed=4), synthetic_dataset(kind, 101, seed=4)
    np.testing.assert_array_equal(a.train.inputs, b.train.inputs)
    counts = np.bincount(np.r_[a.train.labels, a.test.labels])
    assert counts.max() - counts.min() <= 1
    assert len(a.train) == 81 and len(a.test) == 20
    rows = {tuple(r) for r in a.train.inputs}
    assert not any(tuple(r) in rows for r in a.test.inputs)
    np.testing.assert_allclose(a.train.inputs.mean(axis=0), 0.0, atol=1e-12)
    with pytest.raises(ValueError):
        synthetic_dataset(kind, 9)


def test_blobs_are_linearly_separable_by_lda():
    ds = synthetic_dataset("gaussian_blobs", 1000, seed=0)
    X, y = ds.train.inputs, ds.train.labels
    means = np.array([X[y == k].mean(axis=0) for k in range(3)])
    cov = sum(np.cov(X[y == k].T) * (np.sum(y == k) - 1) for k in range(3)) / (len(y) - 3)
    P = np.linalg.inv(cov)
    scores = X @ P @ means.T - 0.5 * np.sum(means @ P * means, axis=1)
    assert np.mean(np.argmax(scores, axis=1) != y) <= 0.01


# -- oracles ------------------------------------------------------------------------

def test_vertex_sets():
    assert len(l1_vertices(4, 1.0)) == 8
    assert len(linf_vertices(3, 1.0)) == 8


def test_brute_force_lmo_self_consistency():
    res = brute_force_lmo(np.array([1.0, 0.0, 0.0]), "L1Ball", 2.0)
    np.testing.assert_array_equal(res.direction, [-2.0, 0.0, 0.0])
    g = np.array([0.6, -0.8])
    res = brute_force_lmo(g, "FrobeniusBall", 1.5, resolution=2000)
    assert res.objective == pytest.approx(-1.5, rel=1e-5)
    with pytest.raises(ValueError):
        brute_force_lmo(np.ones(7), "L1Ball", 1.0)


def test_jacobi_matches_numpy(rng):
    S = rng.standard_normal((6, 6))
    S = S + S.T
    np.testing.assert_allclose(jacobi_eigenvalues(S), np.sort(np.linalg.eigvalsh(S))[::-1], atol=1e-12)


# -- check suites -------------------------------------------------------------------

def test_all_lmo_suites_pass():
    results = checks.check_lmo(seed=0)
    assert [r.name for r in results] == list(checks.LMO_KINDS)
    assert all(r.passed for r in results), [r.line() for r in results if not r.passed]


def test_sign_bug_mutation_fails_l1_suite():
    def literal_l1(g, lam):
        # the single-vertex rule without the sign of the selected entry
        g = np.asarray(g, dtype=np.float64)
        j = int(np.argmax(np.abs(g)))
        s = np.zeros_like(g)
        s[j] = -lam
        return LmoResult(s, -lam * abs(g[j]))

    (res,) = checks.check_lmo(["l1"], overrides={"l1": literal_l1})
    assert not res.passed


def test_wrong_tv_oracle_fails_tv_suite():
    from condgrad.constraints import lmo_tv

    def half_budget(g, A, lam, eps=1e-9):
        out = lmo_tv(g, A, lam, eps)
        return LmoResult(0.5 * out.direction, 0.5 * out.objective)

    (res,) = checks.check_lmo(["tv"], overrides={"tv": half_budget})
    assert not res.passed


def test_unknown_suite_rejected():
    with pytest.raises(ValueError, match="unknown LMO suite"):
        checks.check_lmo(["spectral"])


def test_pathnorm_check_passes():
    res = checks.check_pathnorm(seed=1)
    assert res.passed, res.details


def test_gap_bench_shape_and_determinism():
    a = checks.gap_bench(eps_values=(1e-1, 1e-2), n_graphs=2, demands_per_graph=1, seed=3)
    b = checks.gap_bench(eps_values=(1e-1, 1e-2), n_graphs=2, demands_per_graph=1, seed=3)
    assert a == b
    assert a["iterations"][0] <= a["iterations"][1]


# -- experiments ----------------------------------------------------------------------

def _cfg(tmp_path, *overrides):
    return parse_config(None, ["seed=0", f"out={tmp_path}", *overrides])


def test_rescale_into_ball():
    net = init_network([4, 5, 3], seed=0)
    for kind in ("FrobeniusBall", "L1Ball", "NuclearBall", "GroupL1InfBall"):
        spec = ConstraintSpec(kind, 2.0)
        from condgrad.constraints import constraint_value
        assert constraint_value(rescale_into_ball(net, spec).params, spec) == pytest.approx(1.0)
    assert path_norm(rescale_into_ball(net, ConstraintSpec("PathNormBall", 2.0))) == pytest.approx(1.0)


def test_run_experiment_zero_iterations(tmp_path):
    cfg = _cfg(tmp_path, "constraint.kind=FrobeniusBall", "optim.iters=0")
    path = run_experiment(cfg)
    assert path.read_text() == "iter,loss,train_err,test_err,constraint_value,eta,wall_ms\n"
    summary = json.loads((tmp_path / "summary.json").read_text())
    for key in ("final_train_err", "final_test_err", "final_constraint_value", "total_wall_ms"):
        assert key in summary
    assert (tmp_path / "net.json").exists()


def _rows(path):
    with open(path) as fh:
        return [{k: v for k, v in r.items() if k != "wall_ms"} for r in csv.DictReader(fh)]


@pytest.mark.parametrize("overrides", [
    ["constraint.kind=FrobeniusBall"],
    ["constraint.kind=TVBall", "constraint.incidence=net", "net.hidden=[4]"],
    ["optim.kind=path_cg", "constraint.kind=PathNormBall", "constraint.lambda=3"],
    ["optim.kind=pgd", "constraint.kind=L1Ball"],
    ["optim.kind=sgd", "dataset.kind=two_spirals"],
])
def test_run_experiment_is_deterministic(tmp_path, overrides):
    common = ["optim.iters=25", "optim.eval_every=5", "dataset.n=200", *overrides]
    a = run_experiment(_cfg(tmp_path / "a", *common))
    b = run_experiment(_cfg(tmp_path / "b", *common))
    assert _rows(a) == _rows(b)
    assert len(_rows(a)) == 25


def test_paired_path_cg_and_sgd_on_blobs(tmp_path):
    base = ["dataset.n=300", "net.hidden=[20]", "optim.iters=300", "optim.batch_size=20"]
    pilot = run_experiment(_cfg(tmp_path / "pilot", *base, "optim.kind=sgd", "optim.lr=0.5"))
    lam = 0.8 * float(_rows(pilot)[-1]["constraint_value"])
    sgd = run_experiment(_cfg(tmp_path / "sgd", *base, "optim.kind=sgd", "optim.lr=0.5"))
    pcg = run_experiment(_cfg(tmp_path / "pcg", *base, "optim.kind=path_cg",
                              "constraint.kind=PathNormBall", f"constraint.lambda={lam!r}"))
    assert float(_rows(sgd)[-1]["constraint_value"]) > lam
    assert max(float(r["constraint_value"]) for r in _rows(pcg)) <= lam * (1 + 1e-8)


def test_run_experiment_annotates_errors(tmp_path):
    cfg = _cfg(tmp_path, "constraint.kind=FrobeniusBall", "dataset.kind=mnist", "net.layers=[10, 10]")
    with pytest.raises(Exception, match=r"\[optim.kind=cg"):
        run_experiment(cfg)
