"""YAML run configuration: defaults, overrides, validation and digest.

Sections and keys (everything optional, defaults give the Ball preset)::

    model:     length, modes, a1, a2, phi0, phi1, forcing (none | manufactured)
    operators: c_scale, delta, b0, a0
    psi:       psi1, psi2, psi3   (polynomial coefficients, lowest degree first)
    time:      t_end, n, start (second | first)
    solver:    tol, max_iter, q_max
    study:     manufactured {j, profile, amplitude, omega, sigma, coeffs},
               n_list, eps_list,
               cheb {k_max, samples, method, per_axis},
               linear {runs, constants, s_values}

``model.length`` accepts the string ``pi``.
"""
import copy
import hashlib
import json
import math

import numpy as np
import yaml

from .errors import ConfigError
from .model import BallParameters, Model
from .nonlinear_scheme import SchemeConfig
from .nonlinearity import NonlinearityTriple, Psi
from .operators import SineSpace, beam_operators
from .step_solver import IterationConfig

DEFAULTS = {
    "model": {"length": "pi", "modes": 8, "a1": 0.5, "a2": 1.0,
              "phi0": [1.0], "phi1": [0.0], "forcing": "none"},
    "operators": {"c_scale": 0.0, "delta": 0.1, "b0": 1.0, "a0": 1.0},
    "psi": {"psi1": [1.0, 1.0], "psi2": [0.0, 0.5], "psi3": [0.0]},
    "time": {"t_end": 1.0, "n": 200, "start": "second"},
    "solver": {"tol": 1e-12, "max_iter": 100, "q_max": 0.9},
    "study": {
        "manufactured": {"j": 1, "profile": "cos", "amplitude": 1.0, "omega": 1.0,
                         "sigma": 1.0, "coeffs": [1.0]},
        "n_list": [100, 200, 400, 800],
        "eps_list": [1e-2, 1e-3, 1e-4],
        "cheb": {"k_max": 40, "samples": 10000, "method": "random", "per_axis": 200},
        "linear": {"runs": 100, "constants": "published", "s_values": [0.0, 0.5, 1.0]},
    },
}

# sub-tables that are merged key by key; everything else is a leaf value
_TABLES = {("study", "manufactured"), ("study", "cheb"), ("study", "linear")}


def _merge(base, update, path=()):
    if not isinstance(update, dict):
        raise ConfigError(f"{'.'.join(path) or 'config'} must be a mapping")
    out = copy.deepcopy(base)
    for key, value in update.items():
        here = path + (str(key),)
        if key not in base:
            raise ConfigError(f"unknown config key {'.'.join(here)}")
        if len(here) == 1 or here in _TABLES:
            out[key] = _merge(base[key], value if value is not None else {}, here)
        else:
            out[key] = value
    return out


def load_yaml(path):
    """Parse ``path``; syntax errors are reported with line and column."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark is not None else str(path)
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"{where}: YAML parse error: {problem}") from exc
    return {} if data is None else data


def _leaf_paths(d, prefix=()):
    for key, value in d.items():
        here = prefix + (key,)
        if isinstance(value, dict) and (len(here) == 1 or here in _TABLES):
            yield from _leaf_paths(value, here)
        else:
            yield here


def apply_override(cfg, item):
    """Apply ``key=value``; the key is dotted (``time.n``) or a unique bare leaf name."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not key=value")
    key, raw = item.split("=", 1)
    key = key.strip()
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"override {key}: cannot parse value {raw!r}") from exc
    paths = list(_leaf_paths(DEFAULTS))
    parts = tuple(key.split("."))
    if parts in paths:
        path = parts
    else:
        hits = [p for p in paths if p[-len(parts):] == parts]
        if not hits:
            raise ConfigError(f"unknown override key {key!r}")
        if len(hits) > 1:
            raise ConfigError(f"override key {key!r} is ambiguous: {', '.join('.'.join(h) for h in hits)}")
        path = hits[0]
    node = cfg
    for p in path[:-1]:
        node = node[p]
    node[path[-1]] = value
    return cfg


def resolve(path=None, overrides=()):
    """Defaults, then the file, then ``--set`` overrides, as a plain dict."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        cfg = _merge(cfg, load_yaml(path))
    for item in overrides:
        apply_override(cfg, item)
    return cfg


def digest(cfg):
    """sha256 of the canonical JSON form of a resolved config."""
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------
# Typed views


def _num(cfg, section, key, positive=False, integer=False):
    value = cfg[section][key]
    if section == "model" and key == "length" and isinstance(value, str) and value.strip().lower() == "pi":
        return math.pi
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{section}.{key} must be an integer")
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key} must be finite")
    if positive and not value > 0:
        raise ConfigError(f"{section}.{key} must be > 0")
    return int(value) if integer else float(value)


def _coeffs(cfg, section, key, modes=None):
    value = cfg[section][key]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise ConfigError(f"{section}.{key} must be a list of numbers")
    arr = np.asarray(value, dtype=float)
    if modes is not None:
        if arr.size > modes:
            raise ConfigError(f"{section}.{key} has {arr.size} entries but model.modes = {modes}")
        arr = np.concatenate([arr, np.zeros(modes - arr.size)])
    return arr


def space_of(cfg):
    return SineSpace(_num(cfg, "model", "length", positive=True),
                     _num(cfg, "model", "modes", positive=True, integer=True))


def triple_of(cfg):
    return NonlinearityTriple(*(Psi.polynomial(_coeffs(cfg, "psi", k), name=k) for k in ("psi1", "psi2", "psi3")))


def model_of(cfg):
    space = space_of(cfg)
    o = cfg["operators"]
    for key in o:
        _num(cfg, "operators", key)
    ops = beam_operators(space, c_scale=float(o["c_scale"]), delta=float(o["delta"]),
                         b0=_num(cfg, "operators", "b0", positive=True),
                         a0=_num(cfg, "operators", "a0", positive=True))
    return Model(space, ops, triple_of(cfg),
                 _num(cfg, "model", "a1", positive=True), _num(cfg, "model", "a2", positive=True))


def iteration_of(cfg):
    return IterationConfig(_num(cfg, "solver", "tol", positive=True),
                           _num(cfg, "solver", "max_iter", positive=True, integer=True),
                           _num(cfg, "solver", "q_max"))


def ball_parameters_of(cfg):
    """BallParameters when the psi's and operators have the Ball form."""
    p1, p2, p3 = (np.trim_zeros(_coeffs(cfg, "psi", k), "b") for k in ("psi1", "psi2", "psi3"))
    if p1.size > 2 or p2.size > 2 or (p2.size and p2[0] != 0.0) or p3.size or cfg["operators"]["c_scale"]:
        raise ConfigError("manufactured forcing needs psi1 = alpha + beta s, psi2 = gamma s, psi3 = 0, c_scale = 0")
    pad = lambda c: np.concatenate([c, np.zeros(2 - c.size)])  # noqa: E731
    p1, p2 = pad(p1), pad(p2)
    return BallParameters(a1=_num(cfg, "model", "a1", positive=True), a2=_num(cfg, "model", "a2", positive=True),
                          alpha=float(p1[0]), beta=float(p1[1]), gamma=float(p2[1]),
                          delta=float(cfg["operators"]["delta"]))


def manufactured_of(cfg):
    from .verification import build_manufactured

    m = cfg["study"]["manufactured"]
    space = space_of(cfg)
    return build_manufactured(
        int(m["j"]), str(m["profile"]), ball_parameters_of(cfg), space.length, space.modes,
        amplitude=float(m["amplitude"]), omega=float(m["omega"]), sigma=float(m["sigma"]),
        coeffs=tuple(m["coeffs"]) if isinstance(m["coeffs"], list) else (m["coeffs"],),
    )


def scheme_config_of(cfg):
    """A validated :class:`SchemeConfig` from a resolved config dict."""
    t_end = _num(cfg, "time", "t_end", positive=True)
    n = _num(cfg, "time", "n", positive=True, integer=True)
    start = cfg["time"]["start"]
    forcing = cfg["model"]["forcing"]
    it = iteration_of(cfg)
    if forcing in (None, "none"):
        model = model_of(cfg)
        J = model.space.modes
        return SchemeConfig(model, t_end, n, _coeffs(cfg, "model", "phi0", J),
                            _coeffs(cfg, "model", "phi1", J), None, it, start)
    if forcing == "manufactured":
        case = manufactured_of(cfg)
        cfg_model = model_of(cfg)
        return SchemeConfig(cfg_model, t_end, n, case.exact(0.0), case.exact_velocity(0.0),
                            case.forcing, it, start)
    raise ConfigError(f"model.forcing must be 'none' or 'manufactured', got {forcing!r}")
