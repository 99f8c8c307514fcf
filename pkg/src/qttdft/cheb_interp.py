"""Chebyshev-Lobatto interpolation on [0, 1].

Nodes are ``c[a] = (1 - cos(pi * a / K)) / 2`` for ``a = 0..K``. The cardinal
(Lagrange) functions are evaluated in second-kind barycentric form with the
classical weights ``(-1)**a``, halved at both endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_PROBES = 513


@dataclass(frozen=True)
class ChebGrid:
    """The ``K + 1`` shifted Chebyshev-Lobatto nodes and barycentric weights."""

    K: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.K + 1


def make_grid(K: int) -> ChebGrid:
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    a = np.arange(K + 1)
    # sin^2 form is exactly symmetric and hits 0, 1/2, 1 exactly
    nodes = np.sin(np.pi * a / (2 * K)) ** 2
    nodes[0], nodes[-1] = 0.0, 1.0
    if K % 2 == 0:
        nodes[K // 2] = 0.5
    # enforce c[a] + c[K-a] == 1 bitwise on the upper half
    half = (K + 1) // 2
    nodes[K - np.arange(half)] = 1.0 - nodes[:half]
    weights = (-1.0) ** a
    weights[0] *= 0.5
    weights[-1] *= 0.5
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return ChebGrid(K, nodes, weights)


def cardinal_matrix(g: ChebGrid, x) -> np.ndarray:
    """Values ``P[a](x[j])`` as an array of shape ``x.shape + (K + 1,)``.

    Points that coincide with a node get the exact Kronecker delta row.
    """
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1)
    diff = flat[:, None] - g.nodes[None, :]
    hit = diff == 0.0
    on_node = hit.any(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = g.weights[None, :] / diff
        out = terms / terms.sum(axis=1, keepdims=True)
    out[on_node] = hit[on_node].astype(float)
    return out.reshape(x.shape + (g.size,))


def cardinal_eval(g: ChebGrid, alpha: int, x: float) -> float:
    """Evaluate the degree-K cardinal polynomial ``P[alpha]`` at ``x``."""
    if not 0 <= alpha <= g.K:
        raise IndexError(f"alpha={alpha} out of range 0..{g.K}")
    return float(cardinal_matrix(g, x)[..., alpha])


def interpolate(g: ChebGrid, samples, x):
    """``sum_a samples[a] * P[a](x)``; ``x`` may be a scalar or an array."""
    samples = np.asarray(samples)
    if samples.shape != (g.size,):
        raise ValueError(f"expected {g.size} samples, got shape {samples.shape}")
    return cardinal_matrix(g, x) @ samples


def lebesgue_constant(g: ChebGrid, probe_points: int = 100_001) -> float:
    """Lower estimate of the Lebesgue constant: the maximum of
    ``sum_a |P[a](x)|`` over a uniform probe grid on [0, 1]."""
    if probe_points < 2:
        raise ValueError("probe_points must be >= 2")
    best = 0.0
    # chunked to bound memory for large K
    for chunk in np.array_split(np.linspace(0.0, 1.0, probe_points), max(1, probe_points // 20_000)):
        best = max(best, float(np.abs(cardinal_matrix(g, chunk)).sum(axis=1).max()))
    return best


def lebesgue_bound(K: int) -> float:
    """Upper bound ``1 + (2/pi) ln(K + 1)`` on the Lebesgue constant."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    return 1.0 + (2.0 / math.pi) * math.log(K + 1)


def ek_bound(K: int) -> float:
    """Closed-form bound on the worst interpolation error of ``exp(-2 pi i x y)``.

    ``4 (pi/2)^(K+1) e^K K^(-K) / (K - pi/2)``; only meaningful for K >= 2.
    Computed in log space so large K does not overflow.
    """
    if K < 2:
        raise ValueError(f"ek_bound needs K >= 2 (pole at K = pi/2), got {K}")
    log_val = (
        math.log(4.0)
        + (K + 1) * math.log(math.pi / 2)
        + K
        - K * math.log(K)
        - math.log(K - math.pi / 2)
    )
    return math.exp(log_val)


def target(y: float, x):
    """The phase family ``f_y(x) = exp(-2 pi i x y)``."""
    return np.exp(-2j * np.pi * np.asarray(x) * y)


def empirical_ek(g: ChebGrid, x_probes: int = DEFAULT_PROBES, y_probes: int = DEFAULT_PROBES) -> float:
    """Max interpolation error of ``f_y`` over uniform (x, y) probe grids."""
    if x_probes < 2 or y_probes < 2:
        raise ValueError("probe counts must be >= 2")
    xs = np.linspace(0.0, 1.0, x_probes)
    ys = np.linspace(0.0, 1.0, y_probes)
    card = cardinal_matrix(g, xs)  # (x, K+1)
    samples = np.exp(-2j * np.pi * np.outer(ys, g.nodes))  # (y, K+1)
    approx = samples @ card.T  # (y, x)
    exact = np.exp(-2j * np.pi * np.outer(ys, xs))
    return float(np.abs(approx - exact).max())
