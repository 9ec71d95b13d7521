"""Integral representation of ``Gamma(C) phi <>_T Gamma(D) psi``.

For diagonal ``C, D, T`` with eigenvalues ``alpha_i, beta_i, t_i`` satisfying
``0 <= t_i <= 2``, ``|alpha_i|, |beta_i| <= 1`` and

    (1 - alpha^2)(1 - beta^2) >= (t - 1)^2 alpha^2 beta^2,

there are diagonal ``P, Q, R, S`` with ``P^2 + Q^2 = I - C^2``,
``R^2 + S^2 = I - D^2`` and ``PR + QS = (T - I) C D`` such that

    (Gamma(C) phi <>_T Gamma(D) psi)(x)
        = E_{y,z}[ phi(Cx + Py + Qz) psi(Dx + Ry + Sz) ]

with ``y, z`` independent standard Gaussians.  On the boundary (equality
above) one can take ``Q = S = 0`` and a single integral suffices.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .chaos import (
    ChaosExpansion,
    ExponentialVector,
    second_quantization,
    t_wick_exponentials,
    t_wick_product,
)
from .hermite import hermite_table
from .errors import CapacityError, DimensionMismatchError, InadmissibleParametersError, NotOnBoundaryError
from .operators import DiagonalOperator
from .quadrature import GRID_BUDGET, CHUNK, QuadratureRule, gaussian_integral_closed_form

CLAMP_TOL = 1e-12
ADMISSIBLE_TOL = 1e-12
BOUNDARY_TOL = 1e-10


def sgn(x: float) -> float:
    """Right-continuous sign: ``sgn(0) = +1``."""
    return 1.0 if x >= 0 else -1.0


def _check_ranges(alpha: float, beta: float, t: float) -> None:
    if abs(alpha) > 1.0:
        raise InadmissibleParametersError(f"|alpha| <= 1 violated: alpha = {alpha!r}")
    if abs(beta) > 1.0:
        raise InadmissibleParametersError(f"|beta| <= 1 violated: beta = {beta!r}")
    if not 0.0 <= t <= 2.0:
        raise InadmissibleParametersError(f"0 <= t <= 2 violated: t = {t!r}")


def admissibility_margin(alpha: float, beta: float, t: float) -> float:
    """``(1 - alpha^2)(1 - beta^2) - (t - 1)^2 alpha^2 beta^2``."""
    return (1.0 - alpha * alpha) * (1.0 - beta * beta) - (t - 1.0) ** 2 * alpha * alpha * beta * beta


def _clamped_sqrt(v: float, what: str) -> float:
    if v < 0.0:
        if v >= -CLAMP_TOL:
            return 0.0
        raise InadmissibleParametersError(f"{what} is negative ({v!r})")
    return math.sqrt(v)


def construct_pqrs(alpha: float, beta: float, t: float) -> tuple[float, float, float, float]:
    """Planar vectors ``(p, q)`` and ``(r, s)`` for one eigen-coordinate.

    Gauge: ``s = 0``, ``r = sqrt(1 - beta^2) >= 0``, ``q >= 0``.

    Raises
    ------
    InadmissibleParametersError
        If a range condition or the admissibility inequality
        ``(1 - alpha^2)(1 - beta^2) >= (t - 1)^2 alpha^2 beta^2`` fails.
    """
    _check_ranges(alpha, beta, t)
    margin = admissibility_margin(alpha, beta, t)
    if margin < -ADMISSIBLE_TOL:
        raise InadmissibleParametersError(
            "(1 - alpha^2)(1 - beta^2) >= (t - 1)^2 alpha^2 beta^2 violated "
            f"(alpha={alpha!r}, beta={beta!r}, t={t!r}, margin={margin:.3g})"
        )
    r = _clamped_sqrt(1.0 - beta * beta, "1 - beta^2")
    if r == 0.0:
        return _clamped_sqrt(1.0 - alpha * alpha, "1 - alpha^2"), 0.0, 0.0, 0.0
    p = (t - 1.0) * alpha * beta / r
    # 1 - alpha^2 - p^2 = margin / r^2, so a rounding residue in the margin is
    # amplified when r is small; decide the boundary q = 0 on the margin itself
    # (sqrt of a residue would leave q ~ 1e-8)
    v = 1.0 - alpha * alpha - p * p
    q = 0.0 if abs(margin) <= CLAMP_TOL else math.sqrt(max(v, 0.0))
    return p, q, r, 0.0


def rotate_pqrs(p: float, q: float, r: float, s: float, theta: float):
    """Rotate both planar vectors by ``theta``; the three constraints are invariant."""
    c, si = math.cos(theta), math.sin(theta)
    return c * p - si * q, si * p + c * q, c * r - si * s, si * r + c * s


def corollary_pr(alpha: float, beta: float, t: float) -> tuple[float, float]:
    """Boundary-case ``p = sgn((t-1) alpha beta) sqrt(1 - alpha^2)``, ``r = sqrt(1 - beta^2)``."""
    _check_ranges(alpha, beta, t)
    margin = admissibility_margin(alpha, beta, t)
    if abs(margin) > BOUNDARY_TOL:
        raise NotOnBoundaryError(
            f"(1 - alpha^2)(1 - beta^2) = (t - 1)^2 alpha^2 beta^2 fails by {margin:.3g}"
        )
    p = sgn((t - 1.0) * alpha * beta) * _clamped_sqrt(1.0 - alpha * alpha, "1 - alpha^2")
    r = _clamped_sqrt(1.0 - beta * beta, "1 - beta^2")
    return p, r


def pqrs_operators(C: DiagonalOperator, D: DiagonalOperator, T: DiagonalOperator, theta: float = 0.0):
    """Eigenvalue-wise :func:`construct_pqrs`, optionally rotated by ``theta``."""
    if not C.dim == D.dim == T.dim:
        raise DimensionMismatchError(f"operator dims differ: {C.dim}, {D.dim}, {T.dim}")
    cols = []
    for a, b, t in zip(C, D, T):
        try:
            v = construct_pqrs(a, b, t)
        except InadmissibleParametersError as exc:
            raise InadmissibleParametersError(f"eigen-coordinate {len(cols)}: {exc}") from None
        cols.append(rotate_pqrs(*v, theta) if theta else v)
    return tuple(DiagonalOperator(tuple(c[k] for c in cols)) for k in range(4))


def corollary_operators(C: DiagonalOperator, D: DiagonalOperator, T: DiagonalOperator):
    """Eigenvalue-wise :func:`corollary_pr` as operators ``(P, R)``."""
    cols = [corollary_pr(a, b, t) for a, b, t in zip(C, D, T)]
    return DiagonalOperator(tuple(c[0] for c in cols)), DiagonalOperator(tuple(c[1] for c in cols))


def _axis_nodes(active: bool, rule: QuadratureRule):
    if active:
        return rule.nodes, rule.weights
    return np.zeros(1), np.ones(1)


def _tensor_rhs(phi, psi, C, D, P, Q, R, S, x, rule: QuadratureRule) -> float:
    d = C.dim
    p, q, r, s = (op.as_array() for op in (P, Q, R, S))
    y_axes = [_axis_nodes(p[i] != 0 or r[i] != 0, rule) for i in range(d)]
    z_axes = [_axis_nodes(q[i] != 0 or s[i] != 0, rule) for i in range(d)]
    axes = y_axes + z_axes
    npts = math.prod(len(n) for n, _ in axes)
    if npts > GRID_BUDGET:
        raise CapacityError(f"representation grid of {npts} points exceeds the budget of {GRID_BUDGET}")
    mesh = np.meshgrid(*[n for n, _ in axes], indexing="ij")
    wmesh = np.meshgrid(*[w for _, w in axes], indexing="ij")
    yz = np.stack([m.ravel() for m in mesh], axis=-1)
    w = np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)
    y, z = yz[:, :d], yz[:, d:]
    cx = C.as_array() * x
    dx = D.as_array() * x
    partial = []
    for i in range(0, len(w), CHUNK):
        sl = slice(i, i + CHUNK)
        u = cx + y[sl] * p + z[sl] * q
        v = dx + y[sl] * r + z[sl] * s
        partial.append(float(np.sum(w[sl] * np.asarray(phi(u)) * np.asarray(psi(v)))))
    return math.fsum(partial)


def _coordinate_grid(i, C, D, P, Q, R, S, x, rule):
    # the (y_i, z_i) grid and the two arguments u_i, v_i on it
    p, q, r, s = P[i], Q[i], R[i], S[i]
    yn, yw = _axis_nodes(p != 0 or r != 0, rule)
    zn, zw = _axis_nodes(q != 0 or s != 0, rule)
    Y, Z = np.meshgrid(yn, zn, indexing="ij")
    w = np.outer(yw, zw).ravel()
    u = C[i] * x[i] + p * Y.ravel() + q * Z.ravel()
    v = D[i] * x[i] + r * Y.ravel() + s * Z.ravel()
    return u, v, w


def _factorized_rhs(phi, psi, C, D, P, Q, R, S, x, rule: QuadratureRule) -> float:
    # Both inputs are sums of products of one-variable factors and coordinate
    # i of the arguments only involves (y_i, z_i), so the tensor rule splits
    # into per-coordinate two-dimensional rules.
    d = C.dim
    if isinstance(phi, ExponentialVector):
        val = 1.0
        for i in range(d):
            u, v, w = _coordinate_grid(i, C, D, P, Q, R, S, x, rule)
            a, b = phi.xi[i], psi.xi[i]
            val *= float(np.dot(w, np.exp(a * u + b * v - 0.5 * (a * a + b * b))))
        return val
    mom = []
    for i in range(d):
        u, v, w = _coordinate_grid(i, C, D, P, Q, R, S, x, rule)
        ka = max((a[i] for a in phi.terms), default=0)
        kb = max((b[i] for b in psi.terms), default=0)
        Hu = hermite_table(u, ka, max(ka, phi.degree_cap))
        Hv = hermite_table(v, kb, max(kb, psi.degree_cap))
        mom.append((Hu * w) @ Hv.T)
    return math.fsum(
        ca * cb * math.prod(mom[i][a[i], b[i]] for i in range(d))
        for a, ca in phi.terms.items()
        for b, cb in psi.terms.items()
    )


def repr_rhs(phi, psi, C, D, P, Q, R, S, x, rule: QuadratureRule, factorized: bool = True) -> float:
    """Gauss-Hermite value of ``E_{y,z}[phi(Cx + Py + Qz) psi(Dx + Ry + Sz)]``.

    ``phi, psi`` may be any callables on ``(n, d)`` arrays; the full tensor
    grid over ``(y, z)`` is used, with axes whose coefficients vanish in both
    arguments dropped (they integrate a constant).  When both inputs are
    chaos expansions or both exponentials and ``factorized`` is set, the same
    tensor rule is applied coordinate by coordinate, which is exact
    rearrangement rather than an approximation.
    """
    x = np.asarray(x, dtype=float)
    d = C.dim
    if x.shape != (d,) or not all(op.dim == d for op in (D, P, Q, R, S)):
        raise DimensionMismatchError("operators and the point must share one dimension")
    same_kind = (isinstance(phi, ChaosExpansion) and isinstance(psi, ChaosExpansion)) or (
        isinstance(phi, ExponentialVector) and isinstance(psi, ExponentialVector)
    )
    if factorized and same_kind:
        if phi.dim != d or psi.dim != d:
            raise DimensionMismatchError("functions and operators must share one dimension")
        return _factorized_rhs(phi, psi, C, D, P, Q, R, S, x, rule)
    return _tensor_rhs(phi, psi, C, D, P, Q, R, S, x, rule)


def repr_rhs_boundary(phi, psi, C, D, P, R, x, rule: QuadratureRule, factorized: bool = True) -> float:
    """Single-integral form ``E_y[phi(Cx + Py) psi(Dx + Ry)]`` used on the boundary."""
    Z = DiagonalOperator.zero(C.dim)
    return repr_rhs(phi, psi, C, D, P, Z, R, Z, x, rule, factorized)


def repr_rhs_exponential(xi: ExponentialVector, eta: ExponentialVector, C, D, P, Q, R, S, x) -> float:
    """``repr_rhs`` for exponential inputs with the Gaussian integrals done in closed form.

    Per coordinate the ``y`` integral is ``E[exp(k y)] = exp(k^2/2) G((1,), (-k,))``
    with ``G`` the closed-form one-dimensional Gaussian integral; same for ``z``.
    """
    x = np.asarray(x, dtype=float)
    a, b = xi.as_array(), eta.as_array()
    c, d_ = C.as_array(), D.as_array()
    p, q, r, s = (op.as_array() for op in (P, Q, R, S))
    log_val = float(np.dot(c * x, a) + np.dot(d_ * x, b)) - 0.5 * (xi.norm_sq + eta.norm_sq)
    factor = 1.0
    for ky, kz in zip(p * a + r * b, q * a + s * b):
        for k in (ky, kz):
            log_val += 0.5 * k * k
            factor *= gaussian_integral_closed_form([1.0], [-k])
    return factor * math.exp(log_val)


def repr_lhs(phi, psi, C, D, T, points) -> np.ndarray:
    """``Gamma(C) phi <>_T Gamma(D) psi`` evaluated through the chaos algebra."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if isinstance(phi, ExponentialVector) and isinstance(psi, ExponentialVector):
        scale, v = t_wick_exponentials(phi.transformed(C), psi.transformed(D), T)
        return scale * np.atleast_1d(v.evaluate(points))
    if isinstance(phi, ChaosExpansion) and isinstance(psi, ChaosExpansion):
        prod = t_wick_product(second_quantization(C, phi), second_quantization(D, psi), T)
        return np.atleast_1d(prod.evaluate(points))
    raise TypeError("phi and psi must both be ChaosExpansion or both be ExponentialVector")


def relative_deviation(lhs: float, rhs: float) -> float:
    """``|lhs - rhs| / max(1, |lhs|)``: relative for large values, absolute near zero."""
    return abs(lhs - rhs) / max(1.0, abs(lhs))


def repr_check(
    phi, psi, C, D, T, points: Sequence, rule: QuadratureRule, theta: float = 0.0, factorized: bool = True
) -> float:
    """Worst deviation between the algebraic product and its integral representation.

    The left side comes from :func:`repr_lhs`, the right side from
    :func:`repr_rhs` with ``(P, Q, R, S)`` from :func:`pqrs_operators`.
    """
    P, Q, R, S = pqrs_operators(C, D, T, theta)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    lhs = repr_lhs(phi, psi, C, D, T, points)
    worst = 0.0
    for x, L in zip(points, lhs):
        worst = max(worst, relative_deviation(float(L), repr_rhs(phi, psi, C, D, P, Q, R, S, x, rule, factorized)))
    return worst
