"""Closed-form matrix product operator for the quantized DFT.

Site ``k`` of the operator carries the output digit ``sigma_k`` and the input
digit ``tau_k``; ``sigma_1`` is the most significant digit of the output index
``s`` while ``tau_1`` is the least significant digit of the input index ``t``:

    s = sum_k d**(n-k) sigma_k,    t = sum_k d**(k-1) tau_k.

Only this pairing of orderings makes the operator low-rank. Cores are stored
as ``(left bond, sigma, tau, right bond)`` complex128 arrays.

The interior core interpolates ``x -> exp(-2 pi i x y)`` on the
Chebyshev-Lobatto grid; the bond dimension is the number of nodes ``K + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .cheb_interp import (
    cardinal_matrix,
    ek_bound,
    empirical_ek,
    lebesgue_bound,
    lebesgue_constant,
    make_grid,
)

# exhaustive comparisons above this many entries must be sampled instead
MAX_EXHAUSTIVE = 2**24


@dataclass(frozen=True)
class Mpo:
    """A chain of 4-index cores ``(l, sigma, tau, r)`` with ``r_0 = r_n = 1``.

    ``kind`` is ``"chebyshev"`` (``param`` = K) or ``"aqft"`` (``param`` = b).
    """

    cores: tuple
    d: int = 2
    kind: str = "chebyshev"
    param: int = 0

    def __post_init__(self):
        cores = tuple(self.cores)
        if not cores:
            raise ValueError("an Mpo needs at least one core")
        if cores[0].shape[0] != 1 or cores[-1].shape[-1] != 1:
            raise ValueError("boundary bond extents must be 1")
        for k, c in enumerate(cores):
            if c.ndim != 4 or c.shape[1] != self.d or c.shape[2] != self.d:
                raise ValueError(f"core {k} has shape {c.shape}, expected (l, {self.d}, {self.d}, r)")
            if k and cores[k - 1].shape[-1] != c.shape[0]:
                raise ValueError(f"bond mismatch between cores {k - 1} and {k}")
        object.__setattr__(self, "cores", cores)

    @property
    def n(self) -> int:
        return len(self.cores)

    @property
    def K(self) -> int:
        return self.param

    @property
    def bond_dims(self) -> list[int]:
        return [c.shape[-1] for c in self.cores[:-1]]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims, default=1)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.complex128)
    a.flags.writeable = False
    return a


def _check_digits(digits: Sequence[int], n: int, d: int) -> np.ndarray:
    arr = np.asarray(list(digits), dtype=np.int64)
    if arr.shape != (n,):
        raise ValueError(f"expected {n} digits, got {len(arr)}")
    if arr.size and (arr.min() < 0 or arr.max() >= d):
        raise ValueError(f"digit out of range 0..{d - 1}: {list(arr)}")
    return arr


# ---------------------------------------------------------------------------
# exact DFT entries


def dft_entry(n: int, d: int, sigma: Sequence[int], tau: Sequence[int]) -> complex:
    """Exact DFT tensor entry ``F(sigma, tau)``.

    Terms ``d**(l-k) sigma_k tau_l`` with ``l > k`` add even multiples of
    ``pi`` and are dropped. The rest group per ``k`` into
    ``2 sigma_k t_k / d**k`` where ``t_k = sum_{l<=k} d**(l-1) tau_l``; this
    sum is accumulated exactly in integers modulo ``2 d**n`` and only the
    final phase is rounded.
    """
    sig = _check_digits(sigma, n, d)
    tau_ = _check_digits(tau, n, d)
    N = d**n
    acc = 0
    t_k = 0
    for k in range(1, n + 1):
        t_k += int(tau_[k - 1]) * d ** (k - 1)
        acc += 2 * int(sig[k - 1]) * t_k * d ** (n - k)
    acc %= 2 * N
    return complex(np.exp(-1j * math.pi * (acc / N)))


def digits_value(digits: np.ndarray, d: int, msb_first: bool) -> np.ndarray:
    """Integer values of digit rows (last axis), as int64 or Python ints.

    Falls back to object dtype when ``d**n`` would overflow int64.
    """
    n = digits.shape[-1]
    big = d**n >= 2**62
    place = np.array([d ** (n - 1 - k) if msb_first else d**k for k in range(n)], dtype=object if big else np.int64)
    src = digits.astype(object) if big else digits.astype(np.int64)
    return (src * place).sum(axis=-1)


def dft_entries(n: int, d: int, sigma: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Vectorised :func:`dft_entry` over digit arrays with last axis ``n``."""
    sigma = np.asarray(sigma)
    tau = np.asarray(tau)
    N = d**n
    s = digits_value(sigma, d, msb_first=True)
    t = digits_value(tau, d, msb_first=False)
    if N <= 2**31:
        frac = ((s * t) % N) / N
    else:
        r = (s.astype(object) * t.astype(object)) % N
        frac = np.vectorize(lambda v: v / N, otypes=[float])(r) if r.size else np.zeros(r.shape)
    return np.exp(-2j * np.pi * np.asarray(frac, dtype=float))


def dft_tensor(n: int, d: int = 2) -> np.ndarray:
    """Dense DFT tensor with axes ``(sigma_1..sigma_n, tau_1..tau_n)``."""
    from .dft_oracle import dense_dft

    F = dense_dft(n, d)
    t = F.reshape((d,) * (2 * n))
    # column axes come out as (tau_n, ..., tau_1); reverse them
    perm = list(range(n)) + list(range(2 * n - 1, n - 1, -1))
    return np.ascontiguousarray(t.transpose(perm))


def tensor_to_matrix(t: np.ndarray, n: int, d: int = 2) -> np.ndarray:
    """Inverse of the layout used by :func:`dft_tensor`: ``M[s, t]``."""
    perm = list(range(n)) + list(range(2 * n - 1, n - 1, -1))
    return np.ascontiguousarray(t.transpose(perm)).reshape(d**n, d**n)


def unfolding_perm(n: int, m: int) -> list[int]:
    """Axis order that brings ``(sigma_1:m, tau_1:m)`` to the front."""
    return list(range(m)) + list(range(n, n + m)) + list(range(m, n)) + list(range(n + m, 2 * n))


# ---------------------------------------------------------------------------
# cores


def build_internal_core(K: int, d: int = 2) -> np.ndarray:
    """``A[a, sigma, tau, b] = P_a((sigma + c_b)/d) exp(-(2/d) pi i (sigma + c_b) tau)``."""
    if d < 2:
        raise ValueError(f"qudit dimension must be >= 2, got {d}")
    g = make_grid(K)
    sig = np.arange(d)
    x = (sig[:, None] + g.nodes[None, :]) / d  # (sigma, b)
    P = cardinal_matrix(g, x)  # (sigma, b, a)
    phase = np.exp(-2j * np.pi * (sig[:, None, None] + g.nodes[None, None, :]) * sig[None, :, None] / d)  # (sigma, tau, b)
    core = P.transpose(2, 0, 1)[:, :, None, :] * phase[None, :, :, :]
    return _frozen(core)


def build_left_core(K: int, d: int = 2) -> np.ndarray:
    """``A_L[0, sigma, tau, b] = exp(-(2/d) pi i (sigma + c_b) tau)``, shape ``(1, d, d, K+1)``.

    Equal to the sum of the interior core over its left index because the
    cardinal functions sum to one.
    """
    g = make_grid(K)
    sig = np.arange(d)
    phase = np.exp(-2j * np.pi * (sig[:, None, None] + g.nodes[None, None, :]) * sig[None, :, None] / d)
    return _frozen(phase[None])


def phase_core(d: int = 2) -> np.ndarray:
    """The exact single-site transform ``exp(-(2/d) pi i sigma tau)``, shape ``(1, d, d, 1)``."""
    sig = np.arange(d)
    return _frozen(np.exp(-2j * np.pi * np.outer(sig, sig) / d)[None, :, :, None])


def assemble_qft_mpo(n: int, K: int, d: int = 2) -> Mpo:
    """The n-site DFT operator ``[A_L, A, ..., A, A_R]`` with bond dimension ``K + 1``.

    The interior cores are one shared read-only array.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if n == 1:
        return Mpo((phase_core(d),), d=d, kind="chebyshev", param=K)
    A = build_internal_core(K, d)
    right = _frozen(A[:, :, :, :1])
    cores = (build_left_core(K, d),) + (A,) * (n - 2) + (right,)
    return Mpo(cores, d=d, kind="chebyshev", param=K)


# ---------------------------------------------------------------------------
# evaluation


def mpo_entry(mpo: Mpo, sigma: Sequence[int], tau: Sequence[int]) -> complex:
    """Entry of the operator at ``(sigma, tau)``: a left-to-right product of
    the selected bond matrices, ``O(n r**2)``."""
    sig = _check_digits(sigma, mpo.n, mpo.d)
    ta = _check_digits(tau, mpo.n, mpo.d)
    v = mpo.cores[0][0, sig[0], ta[0], :]
    for k in range(1, mpo.n):
        v = v @ mpo.cores[k][:, sig[k], ta[k], :]
    return complex(v[0])


def mpo_entries(mpo: Mpo, sigma: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Vectorised :func:`mpo_entry` for digit arrays of shape ``(E, n)``."""
    sigma = np.asarray(sigma, dtype=np.int64)
    tau = np.asarray(tau, dtype=np.int64)
    v = mpo.cores[0][0][sigma[:, 0], tau[:, 0], :]
    for k in range(1, mpo.n):
        M = mpo.cores[k].transpose(1, 2, 0, 3)[sigma[:, k], tau[:, k]]  # (E, l, r)
        v = np.einsum("el,elr->er", v, M)
    return v[:, 0]


def _contract_range(cores: Sequence[np.ndarray], d: int) -> np.ndarray:
    """Contract consecutive cores into ``(l, S, T, r)`` with ``S``/``T`` the
    site digits flattened in site order."""
    acc = cores[0]
    for c in cores[1:]:
        l, S, T, _ = acc.shape
        r = c.shape[-1]
        # (l,S,T,a) x (a,s,t,r) -> (l,S,s,T,t,r)
        x = np.tensordot(acc, c, axes=([3], [0]))  # (l,S,T,s,t,r)
        acc = x.transpose(0, 1, 3, 2, 4, 5).reshape(l, S * d, T * d, r)
    return acc


def contract_dense(mpo: Mpo) -> np.ndarray:
    """Dense operator tensor with axes ``(sigma_1..sigma_n, tau_1..tau_n)``."""
    full = _contract_range(mpo.cores, mpo.d)
    return np.ascontiguousarray(full[0, :, :, 0].reshape((mpo.d,) * (2 * mpo.n)))


def to_matrix(mpo: Mpo) -> np.ndarray:
    """Dense operator as an ``N x N`` matrix in natural ``(s, t)`` order."""
    return tensor_to_matrix(contract_dense(mpo), mpo.n, mpo.d)


def _all_digits(count: int, d: int) -> np.ndarray:
    """All digit strings of length ``count`` in C order, shape ``(d**count, count)``."""
    if count == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((d,) * count).reshape(count, -1).T
    return grids.astype(np.int64)


Reference = Callable[[np.ndarray, np.ndarray], np.ndarray]


def dft_reference(n: int, d: int = 2) -> Reference:
    return lambda sig, tau: dft_entries(n, d, sig, tau)


class ErrorReport(NamedTuple):
    max_error: float
    entries: int
    exhaustive: bool


def entrywise_error(
    mpo: Mpo,
    reference: Reference | None = None,
    *,
    samples: int | None = None,
    seed: int = 0,
    chunk_rows: int = 256,
) -> ErrorReport:
    """Max ``|mpo - reference|`` over all entries or ``samples`` random ones.

    Exhaustive mode splits the chain at the middle and multiplies the two
    dense halves block by block, so memory stays bounded.
    """
    n, d = mpo.n, mpo.d
    if reference is None:
        reference = dft_reference(n, d)
    total = d ** (2 * n)
    if samples is not None:
        rng = np.random.default_rng(seed)
        worst = 0.0
        for start in range(0, samples, 8192):
            size = min(8192, samples - start)
            sig = rng.integers(0, d, size=(size, n))
            tau = rng.integers(0, d, size=(size, n))
            err = np.abs(mpo_entries(mpo, sig, tau) - reference(sig, tau))
            worst = max(worst, float(err.max()))
        return ErrorReport(worst, samples, False)
    if total > MAX_EXHAUSTIVE:
        raise ValueError(f"exhaustive check of {total} entries exceeds {MAX_EXHAUSTIVE}; pass samples")

    h = n // 2
    if h == 0:
        sig = _all_digits(n, d)
        digits = np.concatenate([np.repeat(sig, d**n, axis=0), np.tile(sig, (d**n, 1))], axis=1)
        err = np.abs(mpo_entries(mpo, digits[:, :n], digits[:, n:]) - reference(digits[:, :n], digits[:, n:]))
        return ErrorReport(float(err.max()), total, True)

    left = _contract_range(mpo.cores[:h], d)[0]  # (S_h, T_h, r)
    right = _contract_range(mpo.cores[h:], d)[..., 0]  # (r, S', T')
    r = left.shape[-1]
    lm = left.reshape(-1, r)
    rm = right.reshape(r, -1)
    # digit strings matching the row/column layout of lm @ rm
    dh, dt = _all_digits(h, d), _all_digits(n - h, d)
    row_sig = np.repeat(dh, d**h, axis=0)
    row_tau = np.tile(dh, (d**h, 1))
    col_sig = np.repeat(dt, d ** (n - h), axis=0)
    col_tau = np.tile(dt, (d ** (n - h), 1))
    ncols = rm.shape[1]
    worst = 0.0
    for start in range(0, lm.shape[0], chunk_rows):
        stop = min(start + chunk_rows, lm.shape[0])
        block = lm[start:stop] @ rm
        k = stop - start
        sig = np.concatenate(
            [np.broadcast_to(row_sig[start:stop, None, :], (k, ncols, h)),
             np.broadcast_to(col_sig[None, :, :], (k, ncols, n - h))], axis=2)
        tau = np.concatenate(
            [np.broadcast_to(row_tau[start:stop, None, :], (k, ncols, h)),
             np.broadcast_to(col_tau[None, :, :], (k, ncols, n - h))], axis=2)
        worst = max(worst, float(np.abs(block - reference(sig, tau)).max()))
    return ErrorReport(worst, total, True)


def reference_error(
    n: int,
    d: int,
    f: Reference,
    g: Reference,
    *,
    samples: int | None = None,
    seed: int = 0,
) -> ErrorReport:
    """Max ``|f - g|`` between two entry formulas, exhaustive or sampled."""
    if samples is not None:
        rng = np.random.default_rng(seed)
        sig = rng.integers(0, d, size=(samples, n))
        tau = rng.integers(0, d, size=(samples, n))
        return ErrorReport(float(np.abs(f(sig, tau) - g(sig, tau)).max()), samples, False)
    total = d ** (2 * n)
    if total > MAX_EXHAUSTIVE:
        raise ValueError(f"exhaustive check of {total} entries exceeds {MAX_EXHAUSTIVE}; pass samples")
    dig = _all_digits(n, d)
    worst = 0.0
    step = max(1, 2**16 // d**n)
    for start in range(0, d**n, step):
        rows = dig[start : start + step]
        sig = np.repeat(rows, d**n, axis=0)
        tau = np.tile(dig, (rows.shape[0], 1))
        worst = max(worst, float(np.abs(f(sig, tau) - g(sig, tau)).max()))
    return ErrorReport(worst, total, True)


# ---------------------------------------------------------------------------
# bounds and the unfolding factorization


class TheoremBound(NamedTuple):
    bound: float
    crude: float


def theorem_error_bound(n: int, K: int, *, empirical: bool = False, probes: int = 513) -> TheoremBound:
    """Entrywise error bound ``(L**(n-1) - 1)/(L - 1) * E`` and the crude
    ``(n-1) L**(n-2) E``.

    ``L`` and ``E`` are the closed-form bounds on the Lebesgue constant and the
    interpolation error, or with ``empirical=True`` their measured values on
    uniform probe grids.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n == 1:
        return TheoremBound(0.0, 0.0)
    if empirical:
        g = make_grid(K)
        lam = lebesgue_constant(g, 100_001)
        E = empirical_ek(g, probes, probes)
    else:
        lam = lebesgue_bound(K)
        E = ek_bound(K)
    geom = float(n - 1) if lam == 1.0 else (lam ** (n - 1) - 1.0) / (lam - 1.0)
    return TheoremBound(geom * E, (n - 1) * lam ** (n - 2) * E)


@dataclass(frozen=True)
class UnfoldingFactors:
    """Rank-(K+1) factors of the m-th unfolding.

    ``R[sigma_1:m, tau_1:m, a]`` is the exact m-site DFT tensor times
    ``exp(-2 pi i y c_a)``; ``L[a, sigma_m+1:n, tau_m+1:n]`` is ``P_a(x)``
    times the (n-m)-site DFT tensor. Digit groups are flattened in C order.
    """

    n: int
    m: int
    K: int
    d: int
    R: np.ndarray
    L: np.ndarray

    def approximation(self) -> np.ndarray:
        """``R @ L`` as a ``d**(2m) x d**(2(n-m))`` unfolding matrix."""
        r = self.K + 1
        return self.R.reshape(-1, r) @ self.L.reshape(r, -1)


def y_leq(tau: np.ndarray, d: int = 2) -> np.ndarray:
    """``y = sum_{l=1..m} d**(l-m-1) tau_l`` over the last axis."""
    tau = np.asarray(tau)
    m = tau.shape[-1]
    w = float(d) ** (np.arange(1, m + 1) - m - 1)
    return tau @ w


def x_gtr(sigma_tail: np.ndarray, d: int = 2) -> np.ndarray:
    """``x = sum_{k=m+1..n} d**(m-k) sigma_k`` over the last axis (the tail digits)."""
    sigma_tail = np.asarray(sigma_tail)
    w = float(d) ** -np.arange(1, sigma_tail.shape[-1] + 1)
    return sigma_tail @ w


def exact_f_m(m: int, K: int, d: int = 2) -> np.ndarray:
    """``F_m[sigma_1:m, tau_1:m, a] = F(sigma, tau) exp(-2 pi i y c_a)``, shape ``(d**m, d**m, K+1)``."""
    g = make_grid(K)
    dig = _all_digits(m, d)
    sig = np.repeat(dig, d**m, axis=0)
    tau = np.tile(dig, (d**m, 1))
    F = dft_entries(m, d, sig, tau)
    y = y_leq(tau, d)
    out = F[:, None] * np.exp(-2j * np.pi * np.outer(y, g.nodes))
    return out.reshape(d**m, d**m, K + 1)


def build_unfolding_factors(n: int, m: int, K: int, d: int = 2) -> UnfoldingFactors:
    if not 1 <= m < n:
        raise ValueError(f"split m must satisfy 1 <= m < n={n}, got {m}")
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    g = make_grid(K)
    R = exact_f_m(m, K, d)
    q = n - m
    dig = _all_digits(q, d)
    sig = np.repeat(dig, d**q, axis=0)
    tau = np.tile(dig, (d**q, 1))
    F = dft_entries(q, d, sig, tau)
    P = cardinal_matrix(g, x_gtr(sig, d))  # (E, K+1)
    L = (P * F[:, None]).T.reshape(K + 1, d**q, d**q)
    return UnfoldingFactors(n, m, K, d, _frozen(R), _frozen(L))
