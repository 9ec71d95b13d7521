"""Gaussian integrals: Gauss-Hermite rules, tensor-grid and Monte Carlo Lp norms.

All integrals are against the standard Gaussian probability measure
``mu(dx) = exp(-|x|^2 / 2) dx / (2 pi)^{d/2}``.  Test functions are callables
mapping an ``(n, d)`` array of points to ``n`` values.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import CapacityError, DegenerateIntegralError

logger = logging.getLogger(__name__)

MAX_ORDER = 200
GRID_BUDGET = 1 << 24  # tensor-grid points per integral
CHUNK = 1 << 16  # points per evaluation / RNG chunk

Evaluable = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights for the one-dimensional standard Gaussian."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def _orthonormal_hermite(x: np.ndarray, n: int) -> np.ndarray:
    # h_k / sqrt(k!) for k = 0..n; stays O(1) where the weight is not negligible
    out = np.empty((n + 1,) + x.shape)
    out[0] = 1.0
    if n >= 1:
        out[1] = x
    for k in range(1, n):
        out[k + 1] = (x * out[k] - math.sqrt(k) * out[k - 1]) / math.sqrt(k + 1)
    return out


@lru_cache(maxsize=None)
def _golub_welsch(order: int) -> tuple[np.ndarray, np.ndarray]:
    # Jacobi matrix of the monic probabilists' Hermite recurrence: zero
    # diagonal, off-diagonal sqrt(k).
    off = np.sqrt(np.arange(1, order, dtype=float))
    nodes = eigh_tridiagonal(np.zeros(order), off, eigvals_only=True)
    # two Newton steps on h_order, then Christoffel weights
    # 1 / sum_k hhat_k(x)^2; both are more accurate than eigenvector entries
    for _ in range(2):
        H = _orthonormal_hermite(nodes, order)
        nodes = nodes - H[order] / (math.sqrt(order) * H[order - 1])
    weights = 1.0 / np.sum(_orthonormal_hermite(nodes, order - 1) ** 2, axis=0)
    # enforce exact symmetry and unit mass
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    weights = weights / math.fsum(weights)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_hermite_rule(order: int) -> QuadratureRule:
    """Gauss-Hermite rule of the given order for the probabilists' weight.

    Exact for polynomials of degree ``<= 2 * order - 1``.  Nodes come from
    the Golub-Welsch eigenvalue problem (polished by Newton steps), weights
    from the Christoffel function; cached per order.
    """
    if not isinstance(order, (int, np.integer)) or not 1 <= order <= MAX_ORDER:
        raise ValueError(f"quadrature order must be an integer in [1, {MAX_ORDER}], got {order!r}")
    nodes, weights = _golub_welsch(int(order))
    return QuadratureRule(nodes, weights)


def tensor_grid(rule: QuadratureRule, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Full tensor grid: points of shape ``(order**d, d)`` and product weights."""
    npts = rule.order**d
    if npts > GRID_BUDGET:
        raise CapacityError(f"tensor grid of {npts} points exceeds the budget of {GRID_BUDGET}")
    mesh = np.meshgrid(*([rule.nodes] * d), indexing="ij")
    wmesh = np.meshgrid(*([rule.weights] * d), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    w = np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)
    return pts, w


def _chunked_sum(values: Callable[[slice], np.ndarray], n: int) -> float:
    # fixed chunk boundaries so the reduction order never depends on scheduling
    partial = [float(np.sum(values(slice(i, min(i + CHUNK, n))))) for i in range(0, n, CHUNK)]
    return math.fsum(partial)


def gaussian_expectation(f: Evaluable, rule: QuadratureRule, d: int) -> float:
    """``E[f]`` on the tensor grid."""
    pts, w = tensor_grid(rule, d)
    return _chunked_sum(lambda s: w[s] * f(pts[s]), len(w))


def lp_norm_quadrature(f: Evaluable, p: float, rule: QuadratureRule, d: int) -> float:
    """``(sum_grid w |f(x)|^p)^(1/p)`` over the ``d``-fold tensor grid of ``rule``."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    pts, w = tensor_grid(rule, d)
    total = _chunked_sum(lambda s: w[s] * np.abs(f(pts[s])) ** p, len(w))
    return total ** (1.0 / p)


@dataclass(frozen=True)
class AdaptiveResult:
    value: float
    achieved_rtol: float
    order: int
    converged: bool


def adaptive_lp_norm(
    f: Evaluable,
    p: float,
    d: int,
    rtol: float = 1e-9,
    start_order: int = 20,
    max_order: int = MAX_ORDER,
) -> AdaptiveResult:
    """Lp norm by order doubling until successive estimates agree to ``rtol``.

    Orders run ``start, 2 start, ...`` and finally ``max_order``; orders whose
    tensor grid would exceed the budget are skipped.  ``achieved_rtol`` is the
    relative change between the last two estimates.
    """
    max_order = min(max_order, int(GRID_BUDGET ** (1.0 / d)))
    orders = []
    o = min(start_order, max_order)
    while o < max_order:
        orders.append(o)
        o *= 2
    orders.append(max_order)
    prev = None
    change = math.inf
    for o in orders:
        val = lp_norm_quadrature(f, p, gauss_hermite_rule(o), d)
        if prev is not None:
            change = abs(val - prev) / max(abs(val), 1e-300)
            if change < rtol:
                return AdaptiveResult(val, change, o, True)
        prev = val
    logger.warning("adaptive Lp norm stopped at order %d with relative change %.3g", orders[-1], change)
    return AdaptiveResult(prev, change, orders[-1], False)


def exact_order_for_polynomial(p: int, deg: int) -> int:
    """Smallest order integrating ``|f|^p = f^p`` exactly for even ``p`` and ``deg f = deg``."""
    return max(1, (p * deg) // 2 + 1)


# -- Monte Carlo --------------------------------------------------------------


def _chunk_generator(seed: int, index: int) -> np.random.Generator:
    # counter-based stream keyed by (seed, chunk index)
    ss = np.random.SeedSequence(entropy=int(seed) & ((1 << 64) - 1), spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


def _mc_chunk(f: Evaluable, p: float, d: int, seed: int, index: int, n: int):
    x = _chunk_generator(seed, index).standard_normal((n, d))
    a = np.abs(np.asarray(f(x), dtype=float))
    v = a**p
    mean = float(np.mean(v))
    m2 = float(np.sum((v - mean) ** 2))
    return n, mean, m2, float(a.min()), float(a.max())


def mc_lp_norm(
    f: Evaluable,
    p: float,
    samples: int,
    seed: int,
    d: int = 1,
    jobs: int = 1,
) -> tuple[float, float]:
    """Monte Carlo estimate of ``||f||_p`` and its standard error.

    Samples are drawn in fixed chunks, each from its own Philox stream keyed by
    ``(seed, chunk index)``, and the chunk statistics are merged in index
    order, so the result is identical for any ``jobs``.  The standard error
    of the mean of ``|f|^p`` is carried through the ``1/p`` power by the delta
    method.
    """
    if samples < 100:
        raise ValueError(f"need at least 100 samples, got {samples}")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    sizes = [min(CHUNK, samples - i) for i in range(0, samples, CHUNK)]
    tasks = list(enumerate(sizes))
    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            stats = list(pool.map(lambda t: _mc_chunk(f, p, d, seed, t[0], t[1]), tasks))
    else:
        stats = [_mc_chunk(f, p, d, seed, i, n) for i, n in tasks]

    lo = min(s[3] for s in stats)
    hi = max(s[4] for s in stats)
    if lo == hi:
        return lo, 0.0

    n_tot, mean, m2 = 0, 0.0, 0.0
    for n, m, q, _, _ in stats:  # Chan et al. pairwise merge, in chunk order
        delta = m - mean
        tot = n_tot + n
        mean += delta * n / tot
        m2 += q + delta * delta * n_tot * n / tot
        n_tot = tot
    var = m2 / (n_tot - 1)
    se_mean = math.sqrt(var / n_tot)
    est = mean ** (1.0 / p)
    stderr = est / (p * mean) * se_mean if mean > 0 else 0.0
    return est, stderr


# -- closed-form Gaussian integral ---------------------------------------------


def _check_ab(a: Sequence[float], b: Sequence[float]):
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    if len(a) != len(b) or not a:
        raise ValueError("a and b must be nonempty and of equal length")
    saa = math.fsum(v * v for v in a)
    if saa == 0.0:
        raise DegenerateIntegralError("all a_i are zero; the integral diverges")
    return a, b, saa


def gaussian_integral_closed_form(a: Sequence[float], b: Sequence[float]) -> float:
    """``(2 pi)^{-1/2} int exp(-1/2 sum_i (a_i x + b_i)^2) dx`` in closed form.

    Uses the completed-square numerator ``sum a^2 sum b^2 - (sum a b)^2``.
    """
    a, b, saa = _check_ab(a, b)
    sbb = math.fsum(v * v for v in b)
    sab = math.fsum(x * y for x, y in zip(a, b))
    num = saa * sbb - sab * sab
    return math.exp(-0.5 * num / saa) / math.sqrt(saa)


def lagrange_sum(a: Sequence[float], b: Sequence[float]) -> float:
    """``sum_{i<j} (a_i b_j - a_j b_i)^2``."""
    n = len(a)
    return math.fsum((a[i] * b[j] - a[j] * b[i]) ** 2 for i in range(n) for j in range(i + 1, n))


def gaussian_integral_lagrange(a: Sequence[float], b: Sequence[float]) -> float:
    """Same integral with the numerator written as a Lagrange sum of squares."""
    a, b, saa = _check_ab(a, b)
    return math.exp(-0.5 * lagrange_sum(a, b) / saa) / math.sqrt(saa)


def gaussian_integral_quadrature(a: Sequence[float], b: Sequence[float], order: int = 60) -> float:
    """The same integral by Gauss-Hermite quadrature of the raw integrand.

    The variable is rescaled by ``1/sqrt(sum a^2)`` (the integrand's own width)
    so that the ratio to the Gaussian weight stays bounded; no other
    information about the closed form is used.
    """
    a, b, saa = _check_ab(a, b)
    sigma = 1.0 / math.sqrt(saa)
    rule = gauss_hermite_rule(order)
    av = np.array(a)
    bv = np.array(b)
    y = rule.nodes
    x = sigma * y
    expo = -0.5 * np.sum((np.outer(x, av) + bv) ** 2, axis=1) + 0.5 * y * y
    return sigma * float(np.dot(rule.weights, np.exp(expo)))
