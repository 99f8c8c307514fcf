"""Quantized tensor-train vectors and operator application.

A vector of length ``d**n`` is split into ``n`` digits. An :class:`Mps`
records which end carries the least significant digit: ``LSB_FIRST`` is the
ordering the DFT operator consumes (``tau``), ``MSB_FIRST`` the ordering it
produces (``sigma``). Dense vectors are always in natural index order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .qft_mpo import Mpo
from .tensor_core import svd_truncate

MAX_DENSE_SITES = 24


class Order(str, Enum):
    LSB_FIRST = "LSB_FIRST"
    MSB_FIRST = "MSB_FIRST"


class ConventionError(ValueError):
    """Raised when an MPS has the wrong significance order for an operation."""


@dataclass(frozen=True)
class BitString:
    digits: tuple
    d: int = 2
    order: Order = Order.MSB_FIRST

    def __post_init__(self):
        if any(not 0 <= x < self.d for x in self.digits):
            raise ValueError(f"digit out of range 0..{self.d - 1}: {self.digits}")

    def __iter__(self):
        return iter(self.digits)

    def __len__(self):
        return len(self.digits)

    def __getitem__(self, i):
        return self.digits[i]


def index_to_digits(s: int, n: int, d: int = 2, order: Order | str = Order.MSB_FIRST) -> BitString:
    order = Order(order)
    if not 0 <= s < d**n:
        raise ValueError(f"index {s} out of range for {n} digits base {d}")
    lsb = []
    for _ in range(n):
        s, r = divmod(s, d)
        lsb.append(r)
    digits = lsb if order is Order.LSB_FIRST else lsb[::-1]
    return BitString(tuple(digits), d, order)


def digits_to_index(bits: BitString | Sequence[int], d: int = 2, order: Order | str | None = None) -> int:
    if isinstance(bits, BitString):
        d, order = bits.d, bits.order if order is None else Order(order)
    order = Order.MSB_FIRST if order is None else Order(order)
    digits = list(bits)
    if order is Order.LSB_FIRST:
        digits = digits[::-1]
    s = 0
    for x in digits:
        s = s * d + int(x)
    return s


@dataclass(frozen=True)
class Mps:
    """Chain of ``(l, digit, r)`` cores with ``r_0 = r_n = 1``."""

    cores: tuple
    d: int = 2
    order: Order = Order.LSB_FIRST

    def __post_init__(self):
        cores = tuple(np.ascontiguousarray(c, dtype=np.complex128) for c in self.cores)
        if not cores:
            raise ValueError("an Mps needs at least one core")
        if cores[0].shape[0] != 1 or cores[-1].shape[-1] != 1:
            raise ValueError("boundary bond extents must be 1")
        for k, c in enumerate(cores):
            if c.ndim != 3 or c.shape[1] != self.d:
                raise ValueError(f"core {k} has shape {c.shape}, expected (l, {self.d}, r)")
            if k and cores[k - 1].shape[-1] != c.shape[0]:
                raise ValueError(f"bond mismatch between cores {k - 1} and {k}")
        object.__setattr__(self, "cores", cores)
        object.__setattr__(self, "order", Order(self.order))

    @property
    def n(self) -> int:
        return len(self.cores)

    @property
    def bond_dims(self) -> list[int]:
        return [c.shape[-1] for c in self.cores[:-1]]


def _num_sites(length: int, d: int) -> int:
    n = round(math.log(length, d)) if length > 1 else 0
    if d**n != length or n < 1:
        raise ValueError(f"length {length} is not a positive power of {d}")
    return n


def _tt_svd(t: np.ndarray, d: int, n: int, tol: float) -> list[np.ndarray]:
    """Left-to-right TT-SVD of a ``(d,)*n`` tensor; ``tol`` is per bond, relative to ``||t||``."""
    norm = float(np.linalg.norm(t))
    cores = []
    rest = t.reshape(1, -1)
    r = 1
    for _ in range(n - 1):
        mat = rest.reshape(r * d, -1)
        # absolute per-bond budget expressed relative to this matrix's norm
        mnorm = float(np.linalg.norm(mat))
        rel = 0.0 if mnorm == 0.0 else tol * norm / mnorm
        U, S, V, _ = svd_truncate(mat, tol=rel)
        k = S.size
        cores.append(U.reshape(r, d, k))
        rest = S[:, None] * V
        r = k
    cores.append(rest.reshape(r, d, 1))
    return cores


def dense_to_mps(v, order: Order | str = Order.LSB_FIRST, tol: float = 1e-12, d: int = 2) -> Mps:
    """TT-SVD quantization of a natural-order dense vector.

    Each of the ``n - 1`` bonds discards at most ``tol / sqrt(n - 1) * ||v||``,
    so the reconstruction error is at most ``tol * ||v||``.
    """
    order = Order(order)
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    n = _num_sites(v.size, d)
    t = v.reshape((d,) * n)  # axis 0 = most significant digit
    if order is Order.LSB_FIRST:
        t = t.transpose(tuple(range(n - 1, -1, -1)))
    per_bond = tol / math.sqrt(n - 1) if n > 1 else 0.0
    return Mps(tuple(_tt_svd(np.ascontiguousarray(t), d, n, per_bond)), d, order)


def mps_to_dense(m: Mps) -> np.ndarray:
    """Contract to a natural-order dense vector of length ``d**n``."""
    if m.n > MAX_DENSE_SITES:
        raise ValueError(f"refusing to densify {m.n} sites (limit {MAX_DENSE_SITES})")
    acc = m.cores[0].reshape(m.d, -1)
    for c in m.cores[1:]:
        acc = (acc @ c.reshape(c.shape[0], -1)).reshape(-1, c.shape[-1])
    t = acc.reshape((m.d,) * m.n)
    if m.order is Order.LSB_FIRST:
        t = t.transpose(tuple(range(m.n - 1, -1, -1)))
    return np.ascontiguousarray(t).reshape(-1)


def bit_reverse(v, d: int = 2) -> np.ndarray:
    """Digit-reversal permutation of a dense vector of length ``d**n``."""
    v = np.asarray(v)
    n = _num_sites(v.size, d)
    return np.ascontiguousarray(v.reshape((d,) * n).transpose(tuple(range(n - 1, -1, -1)))).reshape(-1)


def product_mps(factors: Sequence, order: Order | str = Order.LSB_FIRST) -> Mps:
    """Rank-1 MPS from per-site vectors (site order)."""
    cores = tuple(np.asarray(f, dtype=np.complex128).reshape(1, -1, 1) for f in factors)
    return Mps(cores, cores[0].shape[1], order)


def plane_wave_mps(n: int, k: int, d: int = 2) -> Mps:
    """Exact rank-1 LSB-first MPS of ``v[t] = exp(+2 pi i k t / d**n)``."""
    N = d**n
    digits = np.arange(d)
    factors = [np.exp(2j * np.pi * ((k * digits * d**j) % N) / N) for j in range(n)]
    return product_mps(factors, Order.LSB_FIRST)


def round_mps(m: Mps, tol: float) -> Mps:
    """TT rounding: right-to-left QR sweep, then left-to-right truncated SVDs.

    Total discarded weight is at most ``tol * ||m||``.
    """
    n, d = m.n, m.d
    if n == 1 or tol <= 0:
        return m
    cores = list(m.cores)
    # right-orthogonalize sites n-1..1
    for k in range(n - 1, 0, -1):
        l, _, r = cores[k].shape
        q, rr = np.linalg.qr(cores[k].reshape(l, d * r).T)
        cores[k] = q.T.reshape(-1, d, r)
        cores[k - 1] = np.tensordot(cores[k - 1], rr.T, axes=([2], [0]))
    norm = float(np.linalg.norm(cores[0]))
    per_bond = tol / math.sqrt(n - 1)
    for k in range(n - 1):
        l, _, r = cores[k].shape
        mat = cores[k].reshape(l * d, r)
        mnorm = float(np.linalg.norm(mat))
        rel = 0.0 if mnorm == 0.0 else per_bond * norm / mnorm
        U, S, V, _ = svd_truncate(mat, tol=rel)
        cores[k] = U.reshape(l, d, -1)
        cores[k + 1] = np.tensordot(S[:, None] * V, cores[k + 1], axes=([1], [0]))
    return Mps(tuple(cores), d, m.order)


def apply_mpo(op: Mpo, v: Mps, tol: float = 1e-12) -> Mps:
    """Apply ``op`` to an LSB-first MPS, returning an MSB-first MPS.

    The exact product has bond dimension ``r_op * r_v``; it is then rounded
    to relative accuracy ``tol`` (``tol=0`` skips rounding).
    """
    if v.order is not Order.LSB_FIRST:
        raise ConventionError(
            f"operator input must be LSB_FIRST (site 1 = least significant digit), got {v.order.value}"
        )
    if op.n != v.n:
        raise ValueError(f"site count mismatch: operator has {op.n}, vector has {v.n}")
    if op.d != v.d:
        raise ValueError(f"qudit dimension mismatch: operator d={op.d}, vector d={v.d}")
    cores = []
    for W, c in zip(op.cores, v.cores):
        lo, d, _, ro = W.shape
        lv, _, rv = c.shape
        x = np.einsum("astb,ltr->alsbr", W, c)
        cores.append(x.reshape(lo * lv, d, ro * rv))
    out = Mps(tuple(cores), v.d, Order.MSB_FIRST)
    return round_mps(out, tol) if tol > 0 else out
