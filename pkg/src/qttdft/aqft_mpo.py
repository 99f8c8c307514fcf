"""Approximate QFT at level ``b`` as an exact MPO of bond dimension ``2**b``.

The interior core is the Chebyshev core with polynomial interpolation
replaced by piecewise-constant interpolation on the uniform grid
``u_b = b / 2**b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qft_mpo import Mpo, Reference, _check_digits, _frozen


@dataclass(frozen=True)
class AqftParams:
    n: int
    b: int
    u_nodes: np.ndarray = field(repr=False)


def aqft_params(n: int, b: int) -> AqftParams:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 <= b <= n - 1:
        raise ValueError(f"approximation level b must be in 0..{n - 1}, got {b}")
    return AqftParams(n, b, np.arange(2**b) / 2**b)


def _aqft_exponent(b: int, sigma: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Kept exponent ``sum_{0 <= k-l <= b} 2**(l-k) sigma_k tau_l`` mod 2.

    Pairs with ``l > k`` contribute even integers and are dropped; the
    remaining terms are dyadic rationals, so the float sum is exact for the
    sizes used here.
    """
    n = sigma.shape[-1]
    acc = np.zeros(sigma.shape[:-1])
    for k in range(n):
        for l in range(max(0, k - b), k + 1):
            acc = acc + sigma[..., k] * tau[..., l] * 2.0 ** (l - k)
    return np.mod(acc, 2.0)


def aqft_entry(p: AqftParams, sigma: Sequence[int], tau: Sequence[int]) -> complex:
    sig = _check_digits(sigma, p.n, 2)
    ta = _check_digits(tau, p.n, 2)
    return complex(np.exp(-1j * math.pi * _aqft_exponent(p.b, sig, ta)))


def aqft_entries(p: AqftParams, sigma: np.ndarray, tau: np.ndarray) -> np.ndarray:
    return np.exp(-1j * np.pi * _aqft_exponent(p.b, np.asarray(sigma), np.asarray(tau)))


def aqft_reference(p: AqftParams) -> Reference:
    return lambda sig, tau: aqft_entries(p, sig, tau)


def _indicator_index(x: np.ndarray, b: int) -> np.ndarray:
    """Index ``a`` with ``x`` in ``[u_a, u_{a+1})``; exact for dyadic ``x``."""
    return np.floor(np.asarray(x) * 2**b).astype(np.int64)


def build_aqft_core(b: int) -> np.ndarray:
    """``A[a, sigma, tau, beta] = chi_a((sigma + u_beta)/2) exp(-pi i (sigma + u_beta) tau)``."""
    if b < 0:
        raise ValueError(f"b must be >= 0, got {b}")
    r = 2**b
    u = np.arange(r) / r
    core = np.zeros((r, 2, 2, r), dtype=np.complex128)
    for sig in (0, 1):
        alpha = _indicator_index((sig + u) / 2, b)
        for tau in (0, 1):
            core[alpha, sig, tau, np.arange(r)] = np.exp(-1j * np.pi * (sig + u) * tau)
    return _frozen(core)


def build_aqft_left_core(b: int) -> np.ndarray:
    """``exp(-pi i (sigma + u_beta) tau)``, shape ``(1, 2, 2, 2**b)``."""
    u = np.arange(2**b) / 2**b
    sig = np.arange(2)
    return _frozen(np.exp(-1j * np.pi * (sig[:, None, None] + u[None, None, :]) * sig[None, :, None])[None])


def assemble_aqft_mpo(n: int, b: int) -> Mpo:
    aqft_params(n, b)
    if n == 1:
        return Mpo((build_aqft_left_core(0)[..., :1],), d=2, kind="aqft", param=b)
    A = build_aqft_core(b)
    right = _frozen(A[:, :, :, :1])
    cores = (build_aqft_left_core(b),) + (A,) * (n - 2) + (right,)
    return Mpo(cores, d=2, kind="aqft", param=b)


def aqft_error_bound(n: int, b: int) -> float:
    """Entrywise distance from the exact DFT is at most ``pi n 2**-b``."""
    return math.pi * n * 2.0**-b
