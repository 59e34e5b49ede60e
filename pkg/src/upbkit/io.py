"""JSON interchange: state-set files and report files."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .constructions import FAMILIES, StateLabel, StateSet, product_state
from .linalg import ToleranceConfig, check_dims

SCHEMA_VERSION = 1


def _encode_vector(v) -> list[list[float]]:
    v = np.asarray(v, dtype=complex)
    return [[float(z.real), float(z.imag)] for z in v]


def _decode_vector(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("complex entries must be [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def stateset_to_dict(upb: StateSet) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "dims": list(upb.dims),
        "family": upb.family,
        "layer": upb.layer,
        "states": [
            {"label": s.label.to_json(), "locals": [_encode_vector(v) for v in s.locals]}
            for s in upb.states
        ],
    }


def stateset_from_dict(data: dict) -> StateSet:
    if not isinstance(data, dict):
        raise ValueError("state-set file must hold a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version!r}")
    try:
        dims = check_dims(data["dims"])
        raw = data["states"]
    except KeyError as exc:
        raise ValueError(f"missing field {exc}") from None
    family = data.get("family", "custom")
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    states = []
    for entry in raw:
        locs = [_decode_vector(v) for v in entry["locals"]]
        if tuple(v.size for v in locs) != dims:
            raise ValueError(f"state {entry.get('label')} does not match dims {dims}")
        states.append(product_state(locs, StateLabel.from_json(entry["label"])))
    return StateSet(dims, tuple(states), int(data.get("layer", 0)), family)


def write_stateset(upb: StateSet, path: str | Path) -> None:
    Path(path).write_text(json.dumps(stateset_to_dict(upb), indent=1) + "\n")


def read_stateset(path: str | Path) -> StateSet:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from None
    return stateset_from_dict(data)


def tolerances_dict(tol: ToleranceConfig) -> dict:
    return {"zero_tol": tol.zero_tol, "rank_tol": tol.rank_tol, "eig_tol": tol.eig_tol}


def make_report(command: list[str], tol: ToleranceConfig, seed: int, results: dict, timings: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "tolerances": tolerances_dict(tol),
        "seed": seed,
        "results": results,
        "timings": timings,
    }


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=1, default=_default) + "\n"


def _default(obj: Any):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")
