"""JSON formats for systems, plant families and experiment configs.

Systems::

    {"type": "ss", "A": [[...]], "B": [[...]], "C": [[...]], "D": [[...]]}
    {"type": "tf", "num": [...], "den": [...]}        # descending powers of s

Families::

    {"nominal": <system>, "deltas": [{"target": "A", "param": 1, "matrix": [[...]]}]}

``param`` is 1-based. Experiment configs hold ``family``, ``controller``,
``theta`` (``{"mu": [...], "sigma": s}``) and optional ``samples``, ``seed``,
``beta``, ``epsilon``, ``gamma_grid``, ``gap_tol``, ``lipschitz_quantile``,
``theta0``, ``feedback_sign`` (``"neg"`` or ``"pos"``) and ``name``.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DomainError
from .lti import StateSpace, tf
from .mc import ExperimentConfig
from .sampling import Delta, GaussianSpec, PlantFamily

CONFIG_KEYS = {
    "family", "controller", "theta", "samples", "seed", "beta", "epsilon", "gamma_grid",
    "gap_tol", "lipschitz_quantile", "theta0", "feedback_sign", "name", "description",
}


def _require(obj: dict, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise DomainError(f"{where}: missing key {key!r}")
    return obj[key]


def _matrix(value, name):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim == 1 and arr.size == 0:
        return arr
    if arr.ndim != 2:
        raise DomainError(f"{name} must be a nested list of rows")
    return arr


def system_from_dict(obj: dict) -> StateSpace:
    kind = _require(obj, "type", "system")
    if kind == "ss":
        A, B, C, D = (_matrix(_require(obj, k, "ss system"), k) for k in "ABCD")
        n = A.shape[0] if A.size else 0
        D = D.reshape(D.shape if D.size else (0, 0))
        if n == 0:
            A = np.zeros((0, 0))
            B = np.zeros((0, D.shape[1]))
            C = np.zeros((D.shape[0], 0))
        return StateSpace(A, B, C, D)
    if kind == "tf":
        num = [float(v) for v in _require(obj, "num", "tf system")]
        den = [float(v) for v in _require(obj, "den", "tf system")]
        return tf(num, den)
    raise DomainError(f"unknown system type {kind!r}")


def system_to_dict(sys: StateSpace) -> dict:
    return {"type": "ss", "A": sys.A.tolist(), "B": sys.B.tolist(), "C": sys.C.tolist(), "D": sys.D.tolist()}


def family_from_dict(obj: dict) -> PlantFamily:
    nominal = system_from_dict(_require(obj, "nominal", "family"))
    deltas = []
    for k, d in enumerate(obj.get("deltas", [])):
        param = int(_require(d, "param", f"delta {k}"))
        if param < 1:
            raise DomainError("delta param indices are 1-based")
        deltas.append(Delta(_require(d, "target", f"delta {k}"), param - 1, _matrix(_require(d, "matrix", f"delta {k}"), "matrix")))
    return PlantFamily(nominal, tuple(deltas))


def signed_controller(K: StateSpace, feedback_sign: str) -> StateSpace:
    """Controller in the positive-feedback convention used throughout."""
    if feedback_sign == "neg":
        return -K
    if feedback_sign == "pos":
        return K
    raise DomainError(f"feedback_sign must be 'neg' or 'pos', got {feedback_sign!r}")


def config_from_dict(obj: dict, **overrides) -> ExperimentConfig:
    if not isinstance(obj, dict):
        raise DomainError("experiment config must be a JSON object")
    unknown = set(obj) - CONFIG_KEYS
    if unknown:
        raise DomainError(f"unknown config keys: {sorted(unknown)}")
    family = family_from_dict(_require(obj, "family", "config"))
    controller = signed_controller(system_from_dict(_require(obj, "controller", "config")),
                                   obj.get("feedback_sign", "neg"))
    theta = _require(obj, "theta", "config")
    spec = GaussianSpec(tuple(_require(theta, "mu", "theta")), float(_require(theta, "sigma", "theta")))
    kw = {
        "samples": int(obj.get("samples", 10_000)),
        "seed": int(obj.get("seed", 0)),
        "beta": float(obj.get("beta", 0.01)),
        "epsilon": float(obj.get("epsilon", 0.05)),
        "gap_tol": float(obj.get("gap_tol", 1e-4)),
        "lipschitz_quantile": float(obj.get("lipschitz_quantile", 1.0)),
        "name": str(obj.get("name", "experiment")),
    }
    if "gamma_grid" in obj:
        kw["gamma_grid"] = tuple(float(g) for g in obj["gamma_grid"])
    if obj.get("theta0") is not None:
        kw["theta0"] = tuple(float(t) for t in obj["theta0"])
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(family, controller, spec, **kw)


def bundled_configs() -> list:
    root = resources.files("gapcert") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def read_json(path_or_name: str) -> dict:
    """Load JSON from a path, or from a bundled config given by bare name."""
    path = Path(path_or_name)
    if path.exists():
        text = path.read_text()
    else:
        name = path_or_name[:-5] if path_or_name.endswith(".json") else path_or_name
        res = resources.files("gapcert") / "configs" / f"{name}.json"
        if not res.is_file():
            raise DomainError(f"no such file or bundled config: {path_or_name}")
        text = res.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"invalid JSON in {path_or_name}: {exc}") from exc


def load_system(path: str) -> StateSpace:
    return system_from_dict(read_json(path))


def load_config(path: str, **overrides) -> ExperimentConfig:
    return config_from_dict(read_json(path), **overrides)
