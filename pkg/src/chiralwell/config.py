"""Run configuration: JSON file plus command-line overrides, validated up front."""

from __future__ import annotations

import copy
import json
import math
from pathlib import Path

from .model import ModelError, ModelParams, PhaseState, derive_params

DEFAULTS = {
    "model": {
        "omega": 1.0,
        "mu": 1.5,
        "zeta": 0.2,
        "capital_omega": 0.0,
        # optional linear pressure mapping mu = pressure_coefficient * pressure
        "pressure": None,
        "pressure_coefficient": 1.0,
        # optional microscopic inputs; when all are set they replace omega/mu/zeta
        "lambda_plus": None,
        "lambda_minus": None,
        "c": None,
        "epsilon": None,
        "eta": None,
    },
    "initial": {"z": 0.3, "theta": 1.0},
    "integration": {
        "t_end_tau": 10.0,
        "method": "adaptive",
        "rtol": 1e-10,
        "atol": 1e-10,
        "step_tau": None,
        "sample_interval_tau": 0.02,
        "pole_policy": "switch",
    },
    "collisions": {
        "rate": 0.0,
        "rate_per_relaxation": None,
        "distribution": "uniform",
        "delta_theta": math.pi,
        "concentration": 1.0,
        "dead_time_tau": 0.0,
    },
    "portrait": {"nz": 41, "ntheta": 64, "separatrix_resolution": 1000},
    "bifurcate": {"mu_min": 0.5, "mu_max": 5.0, "resolution": 91},
    "basin": {"nz": 201, "ntheta": 201, "budget_tau": None, "tol": 1e-4},
    "ensemble": {"n": 500, "start": "attractor", "t_end_tau": 500.0, "sample_interval_tau": 1.0},
    "seed": 0,
    "format": "table",
}


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""


def _merge(base, extra, path=""):
    for k, v in extra.items():
        where = f"{path}{k}"
        if k not in base:
            raise ConfigError(f"{where}: unknown key")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"{where}: expected a table of settings")
            _merge(base[k], v, where + ".")
        else:
            base[k] = v


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def set_path(cfg: dict, dotted: str, value):
    keys = dotted.split(".")
    node = cfg
    for k in keys[:-1]:
        if k not in node or not isinstance(node[k], dict):
            raise ConfigError(f"{dotted}: unknown key")
        node = node[k]
    if keys[-1] not in node:
        raise ConfigError(f"{dotted}: unknown key")
    node[keys[-1]] = value


def load(path=None, overrides=()) -> dict:
    """Defaults, then the JSON file at ``path``, then ``(dotted.key, value)`` overrides."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be an object")
        _merge(cfg, data)
    for key, value in overrides:
        set_path(cfg, key, _parse_value(value) if isinstance(value, str) else value)
    validate(cfg)
    return cfg


def _num(cfg, path, *, lo=None, lo_open=False, hi=None, allow_none=False):
    node = cfg
    for k in path.split("."):
        node = node[k]
    if node is None and allow_none:
        return None
    if isinstance(node, bool) or not isinstance(node, (int, float)) or not math.isfinite(node):
        raise ConfigError(f"{path}: expected a finite number, got {node!r}")
    if lo is not None and (node <= lo if lo_open else node < lo):
        raise ConfigError(f"{path}: must be {'>' if lo_open else '>='} {lo}, got {node!r}")
    if hi is not None and node > hi:
        raise ConfigError(f"{path}: must be <= {hi}, got {node!r}")
    return node


def _choice(cfg, path, options):
    node = cfg
    for k in path.split("."):
        node = node[k]
    if node not in options:
        raise ConfigError(f"{path}: must be one of {list(options)}, got {node!r}")


def validate(cfg: dict):
    m = cfg["model"]
    raw_keys = {"lambda_plus", "lambda_minus", "c", "epsilon", "eta"}
    given = {k for k in raw_keys if m[k] is not None}
    if given:
        missing = raw_keys - given
        if missing:
            raise ConfigError(f"model: raw parameters need all of {sorted(raw_keys)}; missing {sorted(missing)}")
        for k in sorted(raw_keys):
            _num(cfg, f"model.{k}")
    else:
        _num(cfg, "model.omega", lo=0, lo_open=True)
        _num(cfg, "model.mu", lo=0)
        _num(cfg, "model.zeta", lo=0)
        _num(cfg, "model.capital_omega")
        _num(cfg, "model.pressure", lo=0, allow_none=True)
        _num(cfg, "model.pressure_coefficient", lo=0)
    try:
        model_params(cfg)
    except ModelError as exc:
        raise ConfigError(f"model: {exc}") from None
    _num(cfg, "initial.z", lo=-1, hi=1)
    _num(cfg, "initial.theta")
    _num(cfg, "integration.t_end_tau", lo=0, lo_open=True)
    _choice(cfg, "integration.method", ("adaptive", "fixed"))
    _num(cfg, "integration.rtol", lo=0, lo_open=True)
    _num(cfg, "integration.atol", lo=0, lo_open=True)
    _num(cfg, "integration.step_tau", lo=0, lo_open=True, allow_none=True)
    if cfg["integration"]["method"] == "fixed" and cfg["integration"]["step_tau"] is None:
        raise ConfigError("integration.step_tau: required for the fixed-step method")
    _num(cfg, "integration.sample_interval_tau", lo=0, lo_open=True)
    _choice(cfg, "integration.pole_policy", ("switch", "error"))
    _num(cfg, "collisions.rate", lo=0)
    _num(cfg, "collisions.rate_per_relaxation", lo=0, allow_none=True)
    _choice(cfg, "collisions.distribution", ("uniform", "fixed", "wrapped_normal"))
    _num(cfg, "collisions.delta_theta")
    _num(cfg, "collisions.concentration", lo=0, lo_open=True)
    _num(cfg, "collisions.dead_time_tau", lo=0)
    for key in ("portrait.nz", "portrait.ntheta", "portrait.separatrix_resolution",
                "bifurcate.resolution", "basin.nz", "basin.ntheta", "ensemble.n"):
        v = _num(cfg, key, lo=1)
        if int(v) != v:
            raise ConfigError(f"{key}: expected an integer, got {v!r}")
    _num(cfg, "bifurcate.mu_min", lo=0)
    _num(cfg, "bifurcate.mu_max", lo=cfg["bifurcate"]["mu_min"])
    _num(cfg, "basin.budget_tau", lo=0, lo_open=True, allow_none=True)
    _num(cfg, "basin.tol", lo=0, lo_open=True)
    _num(cfg, "ensemble.t_end_tau", lo=0, lo_open=True)
    _num(cfg, "ensemble.sample_interval_tau", lo=0, lo_open=True)
    _choice(cfg, "ensemble.start", ("attractor", "initial"))
    seed = cfg["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed: expected a non-negative integer, got {seed!r}")
    _choice(cfg, "format", ("table", "records"))


def model_params(cfg: dict) -> ModelParams:
    m = cfg["model"]
    if m["lambda_plus"] is not None:
        return derive_params(m["lambda_plus"], m["lambda_minus"], m["c"], m["epsilon"], m["eta"])
    mu = m["mu"]
    if m.get("pressure") is not None:
        mu = m["pressure_coefficient"] * m["pressure"]
    return ModelParams(omega=m["omega"], mu=mu, zeta=m["zeta"], capital_omega=m["capital_omega"])


def initial_state(cfg: dict) -> PhaseState:
    return PhaseState(cfg["initial"]["z"], cfg["initial"]["theta"])

