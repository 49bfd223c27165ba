"""Run configuration: defaults, schema validation and model construction."""

import copy
import json
from importlib import resources

import jsonschema
import numpy as np

from .model import BlockModel, beta_feature_model
from .optimize import grid

__all__ = ["ConfigError", "DEFAULTS", "load_schema", "resolve", "load_config", "block_model",
           "feature_model", "grid_from"]

# Demonstration setting: two balanced blocks, Beta features, h(kappa) = (2 / kappa)^3.
DEFAULTS = {
    "model": {"n": 51, "B": [[0.9, 0.1], [0.1, 0.9]], "pi": [0.5, 0.5]},
    "features": {"family": "beta", "penalty_base": 2.0, "penalty_power": 3.0,
                 "kappa_domain": [2.0, 50.0]},
    "kappa_grid": {"start": 2.0, "stop": 8.0, "step": 0.05},
    "tau_grid": {"start": 0.0, "stop": 1.0, "step": 0.005},
    "evaluator": "balanced",
    "kappa": 3.5,
    "seed": 0,
    "threads": 1,
    "compare": {"trials": 10000, "tau_step": 0.025, "d": None, "select": "magnitude",
                "batch": 500},
    "simulate": {"experiment": "vertex", "classifiers": ["gamma"],
                 "designs": [{"kappa": 3.5, "tau": 0.6}],
                 "channels": [{"assess": 1.0, "accuracy": 1.0}],
                 "mode": "imputed_zero", "estimate": "per_sample", "trials": 100000},
    "celegans": {
        "edges": None,
        "labels": None,
        # block sizes 118 / 83 / 78 and the estimated connectivity of the gap-junction graph
        "surrogate": {"n": 279,
                      "B": [[0.015, 0.017, 0.002], [0.017, 0.027, 0.012], [0.002, 0.012, 0.011]],
                      "pi": [118 / 279, 83 / 279, 78 / 279]},
        "x_grid": {"start": 0.0, "stop": 1.0, "step": 0.05},
        "y_grid": {"start": 0.5, "stop": 1.0, "step": 0.05},
        "curve_grid": {"start": 0.0, "stop": 1.0, "step": 0.05},
        "q_list": [3, 5, 9],
        "trials": 1000,
        "estimate": "per_sample",
    },
}


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is a JSON pointer to the offending value."""

    def __init__(self, path, message):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path


def load_schema():
    with resources.files("egl").joinpath("config_schema.json").open() as fh:
        return json.load(fh)


def _pointer(parts):
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def _merge(base, override):
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def resolve(user=None):
    """Validate a user config against the schema and fill in defaults.

    Validation happens before anything else; the first error (in a stable
    order) is raised as :class:`ConfigError` with its JSON-pointer path.
    """
    user = {} if user is None else user
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(user), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        raise ConfigError(_pointer(err.absolute_path), err.message)
    cfg = _merge(DEFAULTS, user)
    _check_semantics(cfg)
    return cfg


def load_config(path):
    if path is None:
        return resolve({})
    try:
        with open(path) as fh:
            user = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"not valid JSON: {exc}") from exc
    return resolve(user)


def _check_semantics(cfg):
    for section in ("model", "celegans/surrogate"):
        node = cfg
        for key in section.split("/"):
            node = node[key]
        try:
            block_model(node)
        except ValueError as exc:
            raise ConfigError("/" + section, str(exc)) from exc
    for name in ("kappa_grid", "tau_grid"):
        r = cfg[name]
        if r["stop"] < r["start"]:
            raise ConfigError(f"/{name}", "stop must not be below start")
    lo, hi = cfg["features"]["kappa_domain"]
    if not lo < hi:
        raise ConfigError("/features/kappa_domain", "need lower < upper")
    if not (lo <= cfg["kappa_grid"]["start"] and cfg["kappa_grid"]["stop"] <= hi):
        raise ConfigError("/kappa_grid", "grid leaves the kappa domain")
    if not lo <= cfg["kappa"] <= hi:
        raise ConfigError("/kappa", "outside the kappa domain")


def block_model(node):
    return BlockModel(int(node["n"]), np.array(node["B"], dtype=float), np.array(node["pi"], dtype=float))


def feature_model(cfg):
    f = cfg["features"]
    return beta_feature_model(f["penalty_base"], f["penalty_power"], tuple(f["kappa_domain"]))


def grid_from(r):
    return grid(r["start"], r["stop"], r["step"])
