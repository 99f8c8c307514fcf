"""Ground-truth DFT machinery: dense matrices, a radix-2 FFT, and the
dyadic block identity behind complementary low-rankness."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cheb_interp import ek_bound

MAX_DENSE = 2**12


def dense_dft(n: int, d: int = 2) -> np.ndarray:
    """The unnormalized ``d**n``-point DFT matrix ``F[s, t] = exp(-2 pi i s t / N)``.

    The product ``s * t`` is reduced modulo ``N`` in integer arithmetic before
    the phase is formed, so no precision is lost for large indices.
    """
    if n < 0 or d < 2:
        raise ValueError(f"need n >= 0 and d >= 2, got n={n}, d={d}")
    N = d**n
    if N > MAX_DENSE:
        raise ValueError(f"dense DFT of size {N} exceeds guard {MAX_DENSE}")
    idx = np.arange(N, dtype=np.int64)
    r = np.outer(idx, idx) % N
    return np.exp(-2j * np.pi * r / N)


def _bit_reverse_indices(N: int) -> np.ndarray:
    bits = N.bit_length() - 1
    idx = np.arange(N)
    rev = np.zeros_like(idx)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def fft(v) -> np.ndarray:
    """Iterative radix-2 decimation-in-time FFT, sign convention ``exp(-2 pi i s t / N)``."""
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError("fft expects a 1-D vector")
    N = v.shape[0]
    if N < 1 or N & (N - 1):
        raise ValueError(f"length must be a power of 2, got {N}")
    a = v[_bit_reverse_indices(N)].copy()
    size = 2
    while size <= N:
        half = size // 2
        tw = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = a.reshape(-1, size)
        even = blocks[:, :half].copy()
        odd = blocks[:, half:] * tw
        blocks[:, :half] = even + odd
        blocks[:, half:] = even - odd
        size *= 2
    return a


def naive_dft(v) -> np.ndarray:
    """O(N^2) direct summation, for checking :func:`fft`."""
    v = np.asarray(v, dtype=np.complex128)
    N = v.shape[0]
    out = np.empty(N, dtype=np.complex128)
    t = np.arange(N)
    for s in range(N):
        out[s] = np.sum(v * np.exp(-2j * np.pi * ((s * t) % N) / N))
    return out


@dataclass
class BlockReport:
    """Result of :func:`block_identity_check` at one partition level."""

    n: int
    l: int
    K: int | None
    max_residual: float
    residuals: np.ndarray = field(repr=False)
    ranks: np.ndarray | None = field(default=None, repr=False)
    rank_residuals: np.ndarray | None = field(default=None, repr=False)
    rank_threshold: float | None = None

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "l": self.l,
            "K": self.K,
            "max_residual": self.max_residual,
            "blocks": [int(x) for x in self.residuals.shape],
        }
        if self.ranks is not None:
            out["rank_threshold"] = self.rank_threshold
            out["max_numerical_rank"] = int(self.ranks.max())
            out["max_rank_residual"] = float(self.rank_residuals.max())
        return out


def block(F: np.ndarray, n: int, l: int, i: int, j: int) -> np.ndarray:
    """Block ``(i, j)`` of the level-``l`` partition: ``2**l`` block rows by
    ``2**(n-l)`` block columns, each block ``2**(n-l) x 2**l``."""
    M, L = 2 ** (n - l), 2**l
    return F[i * M : (i + 1) * M, j * L : (j + 1) * L]


def block_diagonals(n: int, l: int, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Diagonals ``(D_j, D_i)`` such that ``F_ij = diag(D_j) F_00 diag(D_i)``.

    ``D_j`` is column ``j`` of the ``2**(n-l)``-point DFT and multiplies from
    the left (row side); ``D_i`` is column ``i`` of the ``2**l``-point DFT and
    multiplies from the right. Writing a row as ``i*M + a`` and a column as
    ``j*L + c`` with ``N = M*L``, the cross term ``i*j*M*L`` is a multiple of
    ``N`` and the remainder splits as ``exp(-2 pi i a j / M)``, ``F_00[a, c]``
    and ``exp(-2 pi i i c / L)``.
    """
    M, L = 2 ** (n - l), 2**l
    a = np.arange(M)
    c = np.arange(L)
    d_left = np.exp(-2j * np.pi * ((a * j) % M) / M)
    d_right = np.exp(-2j * np.pi * ((c * i) % L) / L)
    return d_left, d_right


def block_identity_check(n: int, l: int, K: int | None = None, *, swapped: bool = False) -> BlockReport:
    """Check ``F_ij = D_j F_00 D_i`` on every block at level ``l``.

    With ``K`` given, also report each block's numerical rank at threshold
    ``ek_bound(K) * 2**(n/2)`` (the spectral-norm image of an entrywise
    error of ``ek_bound(K)``) and its spectral residual at rank ``K + 1``.
    ``swapped=True`` lets the row-block index pick the left diagonal and the
    column-block index the right one; it exists only to show that
    convention fails.
    """
    if not 0 <= l <= n:
        raise ValueError(f"level l must be in 0..{n}, got {l}")
    if n > 6:
        raise ValueError("block_identity_check is limited to n <= 6")
    F = dense_dft(n)
    F00 = block(F, n, l, 0, 0)
    nb_rows, nb_cols = 2**l, 2 ** (n - l)
    residuals = np.zeros((nb_rows, nb_cols))
    ranks = rank_res = None
    thresh = None
    if K is not None:
        thresh = ek_bound(K) * 2 ** (n / 2)
        ranks = np.zeros((nb_rows, nb_cols), dtype=int)
        rank_res = np.zeros((nb_rows, nb_cols))
    for i in range(nb_rows):
        for j in range(nb_cols):
            # swapped: the row-block index selects the left diagonal instead
            d_left, d_right = block_diagonals(n, l, j, i) if swapped else block_diagonals(n, l, i, j)
            Fij = block(F, n, l, i, j)
            pred = d_left[:, None] * F00 * d_right[None, :]
            residuals[i, j] = np.abs(Fij - pred).max()
            if K is not None:
                s = np.linalg.svd(Fij, compute_uv=False)
                ranks[i, j] = int(np.count_nonzero(s > thresh))
                rank_res[i, j] = s[K + 1] if s.size > K + 1 else 0.0
    return BlockReport(n, l, K, float(residuals.max()), residuals, ranks, rank_res, thresh)
