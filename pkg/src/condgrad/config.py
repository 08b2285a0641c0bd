"""Flat dotted-key experiment configuration.

One ``key = value`` pair per line; ``#`` starts a comment.  Values are read
as JSON when possible (numbers, booleans, lists, quoted strings) and as bare
strings otherwise.  ``--set key=value`` overrides use the same syntax and are
applied after the file.
"""
import json
import os
from pathlib import Path

from .exceptions import ConfigError

REQUIRED = object()

# key -> (type, default)
SCHEMA = {
    "seed": (int, REQUIRED),
    "out": (str, "runs/experiment"),
    "dataset.kind": (str, "gaussian_blobs"),
    "dataset.n": (int, 500),
    "dataset.n_train": (int, 1000),
    "dataset.n_test": (int, 1000),
    "dataset.separation": (float, 10.0),
    "dataset.train_images": (str, None),
    "dataset.train_labels": (str, None),
    "dataset.test_images": (str, None),
    "dataset.test_labels": (str, None),
    "net.layers": (list, None),
    "net.hidden": (list, [50]),
    "constraint.kind": (str, None),
    "constraint.lambda": (float, 10.0),
    "constraint.eps": (float, 1e-9),
    "constraint.tol": (float, 1e-12),
    "constraint.incidence": (str, None),
    "optim.kind": (str, "cg"),
    "optim.iters": (int, 100),
    "optim.batch_size": (int, 50),
    "optim.lr": (float, 0.1),
    "optim.eval_every": (int, 0),
    "schedule.mode": (str, "burn_in_then_decay"),
    "schedule.eta0": (float, 0.9),
    "schedule.burn_in": (int, None),
}

CHOICES = {
    "dataset.kind": {"mnist", "gaussian_blobs", "two_spirals"},
    "optim.kind": {"cg", "path_cg", "pgd", "sgd"},
    "schedule.mode": {"constant", "burn_in_then_decay"},
}

CONSTRAINED = {"cg", "path_cg", "pgd"}


class ExperimentConfig(dict):
    """Validated configuration: a dict keyed by the dotted names of ``SCHEMA``."""

    def to_text(self):
        return "".join(f"{k} = {json.dumps(v)}\n" for k, v in sorted(self.items()))


def _parse_value(text):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _coerce(key, value):
    typ, _ = SCHEMA[key]
    if value is None:
        return None
    try:
        if typ is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise TypeError
            return int(value)
        if typ is float:
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if typ is list:
            if not isinstance(value, list):
                raise TypeError
            return [int(v) for v in value]
        if typ is str:
            return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected {typ.__name__}, got {value!r}") from None
    raise AssertionError(typ)


def parse_text(text, source="<config>"):
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        pairs[key.strip()] = _parse_value(value)
    return pairs


def parse_config(path=None, overrides=(), env=None, check_constraint=True):
    """Read a config file (optional) and apply ``key=value`` overrides.

    Missing ``seed`` falls back to the ``CGC_SEED`` environment variable.
    Raises :class:`ConfigError` naming the offending key for unknown keys,
    type mismatches, bad choices and missing mandatory keys.
    ``check_constraint=False`` skips the optimizer/constraint cross-checks
    (for commands that only need the seed).
    """
    env = os.environ if env is None else env
    raw = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        raw.update(parse_text(path.read_text(), str(path)))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not KEY=VALUE")
        key, value = item.split("=", 1)
        raw[key.strip()] = _parse_value(value)

    unknown = sorted(set(raw) - set(SCHEMA))
    if unknown:
        raise ConfigError(f"unknown config key: {unknown[0]}")
    if "seed" not in raw and env.get("CGC_SEED") not in (None, ""):
        raw["seed"] = _parse_value(env["CGC_SEED"])

    cfg = ExperimentConfig()
    for key, (_, default) in SCHEMA.items():
        if key in raw:
            cfg[key] = _coerce(key, raw[key])
        elif default is REQUIRED:
            raise ConfigError(f"missing mandatory key: {key}")
        else:
            cfg[key] = default
    for key, allowed in CHOICES.items():
        if cfg[key] not in allowed:
            raise ConfigError(f"{key}: {cfg[key]!r} not one of {sorted(allowed)}")
    if check_constraint:
        _validate_constraint(cfg)
    return cfg


def _validate_constraint(cfg):
    from .constraints import Kind, parse_kind

    kind = cfg["constraint.kind"]
    if cfg["optim.kind"] in CONSTRAINED and kind is None:
        raise ConfigError(f"missing mandatory key: constraint.kind (required by optim.kind={cfg['optim.kind']})")
    if kind is None:
        return
    try:
        k = parse_kind(kind)
    except ValueError as err:
        raise ConfigError(f"constraint.kind: {err}") from None
    cfg["constraint.kind"] = k.value
    if not cfg["constraint.lambda"] > 0:
        raise ConfigError("constraint.lambda: must be positive")
    if k is Kind.TV:
        if cfg["constraint.incidence"] is None:
            raise ConfigError("constraint.incidence: TVBall needs an incidence source (use 'net')")
        if cfg["constraint.incidence"] != "net":
            raise ConfigError(f"constraint.incidence: unsupported source {cfg['constraint.incidence']!r}")
    if cfg["optim.kind"] == "path_cg" and k is not Kind.PATH_NORM:
        raise ConfigError("constraint.kind: path_cg requires PathNormBall")
    if cfg["optim.kind"] == "cg" and k is Kind.PATH_NORM:
        raise ConfigError("constraint.kind: PathNormBall needs optim.kind = path_cg")
    if cfg["optim.kind"] == "pgd" and k.value not in ("FrobeniusBall", "L1Ball", "LInfBall"):
        raise ConfigError(f"constraint.kind: no projection available for {k.value} (use cg)")
