"""JSON file formats.

``qttdft-mpo-v1``  operator: cores of shape ``[l, d, d, r]``
``qtt-vec-v1``     dense vector in natural index order
``qtt-mps-v1``     tensor-train vector: cores of shape ``[l, d, r]``

Complex entries are ``[re, im]`` pairs in row-major order. Python's float
repr is the shortest decimal that round-trips, so reading back a written
file reproduces every double bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .qft_mpo import Mpo
from .qtt_engine import Mps, Order

MPO_FORMAT = "qttdft-mpo-v1"
VEC_FORMAT = "qtt-vec-v1"
MPS_FORMAT = "qtt-mps-v1"


class FormatError(ValueError):
    pass


def _pairs(a: np.ndarray) -> list:
    a = np.ascontiguousarray(a, dtype=np.complex128).reshape(-1)
    return a.view(np.float64).reshape(-1, 2).tolist()


def _unpairs(data, shape) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise FormatError("complex data must be a list of [re, im] pairs")
    out = arr.view(np.complex128).reshape(-1)
    expected = int(np.prod(shape))
    if out.size != expected:
        raise FormatError(f"expected {expected} entries for shape {list(shape)}, got {out.size}")
    return out.reshape(shape).copy()


def mpo_to_dict(mpo: Mpo) -> dict:
    return {
        "format": MPO_FORMAT,
        "n": mpo.n,
        "d": mpo.d,
        "kind": mpo.kind,
        "param": mpo.param,
        "cores": [{"shape": list(c.shape), "data": _pairs(c)} for c in mpo.cores],
    }


def mpo_from_dict(obj: dict) -> Mpo:
    if obj.get("format") != MPO_FORMAT:
        raise FormatError(f"not a {MPO_FORMAT} document")
    cores = tuple(_unpairs(c["data"], c["shape"]) for c in obj["cores"])
    mpo = Mpo(cores, d=int(obj["d"]), kind=obj["kind"], param=int(obj["param"]))
    if mpo.n != obj["n"]:
        raise FormatError(f"header says n={obj['n']} but file has {mpo.n} cores")
    return mpo


def vec_to_dict(v: np.ndarray, d: int = 2, order: Order | str = Order.LSB_FIRST) -> dict:
    v = np.asarray(v).reshape(-1)
    n = round(np.log(v.size) / np.log(d)) if v.size > 1 else 0
    return {"format": VEC_FORMAT, "n": int(n), "d": d, "order": Order(order).value, "data": _pairs(v)}


def mps_to_dict(m: Mps) -> dict:
    return {
        "format": MPS_FORMAT,
        "n": m.n,
        "d": m.d,
        "order": m.order.value,
        "cores": [{"shape": list(c.shape), "data": _pairs(c)} for c in m.cores],
    }


def mps_from_dict(obj: dict) -> Mps:
    cores = tuple(_unpairs(c["data"], c["shape"]) for c in obj["cores"])
    return Mps(cores, int(obj["d"]), Order(obj["order"]))


def vector_from_dict(obj: dict) -> tuple[np.ndarray | Mps, Order, int]:
    """Decode either vector format; returns ``(vector_or_mps, order, d)``."""
    fmt = obj.get("format")
    if fmt == VEC_FORMAT:
        d = int(obj["d"])
        v = _unpairs(obj["data"], (d ** int(obj["n"]),))
        return v, Order(obj["order"]), d
    if fmt == MPS_FORMAT:
        m = mps_from_dict(obj)
        return m, m.order, m.d
    raise FormatError(f"unknown vector format {fmt!r}")


def write_json(path: str | Path, obj: dict) -> None:
    Path(path).write_text(json.dumps(obj, separators=(",", ":")), encoding="utf-8")


def read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_mpo(path, mpo: Mpo) -> None:
    write_json(path, mpo_to_dict(mpo))


def read_mpo(path) -> Mpo:
    return mpo_from_dict(read_json(path))
