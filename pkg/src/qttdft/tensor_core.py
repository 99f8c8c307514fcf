"""Dense complex tensor kernels.

Tensors are plain ``numpy.ndarray`` objects of dtype ``complex128`` stored
row-major (last index fastest). Every function here is pure: inputs are never
modified in place.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

DTYPE = np.complex128


class DimensionError(ValueError):
    """Raised when paired tensor extents do not match."""


def as_tensor(data) -> np.ndarray:
    """Return ``data`` as a C-contiguous complex128 array (copy if needed)."""
    t = np.ascontiguousarray(data, dtype=DTYPE)
    if t.ndim and min(t.shape) < 1:
        raise ValueError(f"all extents must be >= 1, got shape {t.shape}")
    return t


def contract(a, b, axes: Sequence[tuple[int, int]]) -> np.ndarray:
    """Contract ``a`` with ``b`` over the index pairs in ``axes``.

    The result carries the surviving indices of ``a`` (in order) followed by
    the surviving indices of ``b``. An empty ``axes`` gives the outer product.
    Implemented as permute, reshape, matmul.
    """
    a = as_tensor(a)
    b = as_tensor(b)
    axes = [(int(i) % max(a.ndim, 1), int(j) % max(b.ndim, 1)) for i, j in axes]
    for i, j in axes:
        if i >= a.ndim or j >= b.ndim:
            raise DimensionError(f"axis pair {(i, j)} out of range")
        if a.shape[i] != b.shape[j]:
            raise DimensionError(
                f"extent mismatch on axis pair {(i, j)}: {a.shape[i]} != {b.shape[j]}"
            )
    ca = [i for i, _ in axes]
    cb = [j for _, j in axes]
    if len(set(ca)) != len(ca) or len(set(cb)) != len(cb):
        raise DimensionError(f"repeated axis in {axes}")
    fa = [i for i in range(a.ndim) if i not in ca]
    fb = [j for j in range(b.ndim) if j not in cb]
    shared = int(np.prod([a.shape[i] for i in ca], dtype=np.int64))
    left = [a.shape[i] for i in fa]
    right = [b.shape[j] for j in fb]
    am = a.transpose(fa + ca).reshape(-1, shared)
    bm = b.transpose(cb + fb).reshape(shared, -1)
    return np.ascontiguousarray((am @ bm).reshape(left + right))


def _check_perm(perm: Sequence[int], ndim: int) -> list[int]:
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(ndim)):
        raise ValueError(f"{perm} is not a permutation of {ndim} axes")
    return perm


def unfold(t, split: int, perm: Sequence[int] | None = None) -> np.ndarray:
    """Matricize ``t``: permute axes by ``perm``, then group the first
    ``split`` axes into rows and the rest into columns."""
    t = as_tensor(t)
    perm = _check_perm(range(t.ndim) if perm is None else perm, t.ndim)
    if not 0 < split < t.ndim:
        raise ValueError(f"split must satisfy 0 < split < {t.ndim}, got {split}")
    p = t.transpose(perm)
    rows = int(np.prod(p.shape[:split], dtype=np.int64))
    return np.ascontiguousarray(p.reshape(rows, -1))


def fold(m, shape: Sequence[int], split: int, perm: Sequence[int] | None = None) -> np.ndarray:
    """Inverse of :func:`unfold` for a tensor of the original ``shape``."""
    shape = tuple(int(s) for s in shape)
    perm = _check_perm(range(len(shape)) if perm is None else perm, len(shape))
    if not 0 < split < len(shape):
        raise ValueError(f"split must satisfy 0 < split < {len(shape)}, got {split}")
    permuted_shape = [shape[p] for p in perm]
    t = as_tensor(m).reshape(permuted_shape)
    return np.ascontiguousarray(t.transpose(np.argsort(perm)))


class TruncatedSVD(NamedTuple):
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    discarded_weight: float


def svd_truncate(m, rank: int | None = None, tol: float | None = None) -> TruncatedSVD:
    """Truncated SVD ``m ~= U @ diag(S) @ V``.

    Exactly one of ``rank`` or ``tol`` must be given. With ``tol`` the
    smallest rank whose discarded weight ``sqrt(sum(dropped S**2))`` is at
    most ``tol * ||m||_F`` is kept. Ties at the cut keep the leading index,
    which ``numpy.linalg.svd`` already orders deterministically.
    """
    m = as_tensor(m)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={m.ndim}")
    if (rank is None) == (tol is None):
        raise ValueError("give exactly one of rank or tol")
    if rank is not None and rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    if tol is not None and tol < 0:
        raise ValueError(f"tol must be nonnegative, got {tol}")

    u, s, vh = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return TruncatedSVD(u[:, :1], np.zeros(1), vh[:1, :], 0.0)

    # tail[k] = sqrt(sum_{i >= k} s_i^2), tail[len(s)] = 0
    tail = np.sqrt(np.concatenate([np.cumsum((s * s)[::-1])[::-1], [0.0]]))
    if rank is None:
        budget = tol * tail[0]
        keep = int(np.argmax(tail <= budget))
        keep = max(keep, 1)
    else:
        keep = min(rank, s.size)
    return TruncatedSVD(
        np.ascontiguousarray(u[:, :keep]),
        s[:keep].copy(),
        np.ascontiguousarray(vh[:keep, :]),
        float(tail[keep]),
    )


def max_abs(t) -> float:
    """Tensor infinity norm: the largest entry modulus (0 for empty)."""
    t = np.asarray(t)
    return float(np.max(np.abs(t))) if t.size else 0.0
