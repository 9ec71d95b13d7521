"""Executable form of the Hoelder-Young inequality for generalized Wick products.

For diagonal ``C, D, T`` (eigenvalues ``alpha_i, beta_i, t_i``) and exponents
``p, q, r > 1`` the bilinear map ``(phi, psi) -> Gamma(C) phi <>_T Gamma(D) psi``
is a contraction ``L^p x L^q -> L^r`` when, for every ``i``,

    (1 - alpha^2)(1 - beta^2) >= (t - 1)^2 alpha^2 beta^2
    r - 1 <= [(p-1)(q-1) - alpha^2 beta^2 t^2] / [(q-1) alpha^2 + (p-1) beta^2 + 2 alpha^2 beta^2 t]

and is unbounded as soon as the second condition fails.  Everything here is
evaluated eigenvalue by eigenvalue in the common eigenbasis.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .chaos import ChaosExpansion, ExponentialVector, second_quantization, t_wick_product
from .errors import (
    ConfigurationError,
    DimensionMismatchError,
    InadmissibleConfigError,
    NoWitnessError,
    NotOnBoundaryError,
    SingularOperatorError,
)
from .operators import DiagonalOperator
from .quadrature import (
    adaptive_lp_norm,
    exact_order_for_polynomial,
    gauss_hermite_rule,
    lp_norm_quadrature,
    mc_lp_norm,
)
from .representation import admissibility_margin, sgn

TOL_CLOSED = 1e-9
TOL_QUAD = 1e-6
LOG_RATIO_CEILING = 700.0


@dataclass(frozen=True)
class HolderConfig:
    """Exponents and operators for one instance of the inequality.

    ``B`` is only used by the weighted (corollary) form.
    """

    p: float
    q: float
    r: float
    C: DiagonalOperator
    D: DiagonalOperator
    T: DiagonalOperator
    B: DiagonalOperator | None = None

    def __post_init__(self):
        for name in ("p", "q", "r"):
            object.__setattr__(self, name, float(getattr(self, name)))
        ops = [self.C, self.D, self.T] + ([self.B] if self.B is not None else [])
        if len({op.dim for op in ops}) != 1:
            raise DimensionMismatchError(f"operator dims differ: {[op.dim for op in ops]}")

    @property
    def dim(self) -> int:
        return self.C.dim

    def eigen_triples(self):
        return zip(self.C.eigs, self.D.eigs, self.T.eigs)

    def _check_exponents(self):
        for name in ("p", "q", "r"):
            v = getattr(self, name)
            if not (v > 1.0 and math.isfinite(v)):
                raise ConfigurationError(f"{name} must be a finite number > 1, got {v!r}")

    def validate_theorem(self) -> None:
        """Raise :class:`ConfigurationError` unless ``|C|, |D| <= I`` and ``0 <= T <= 2I``."""
        self._check_exponents()
        for i, (a, b, t) in enumerate(self.eigen_triples()):
            if abs(a) > 1.0 or abs(b) > 1.0:
                raise ConfigurationError(f"eigen-coordinate {i}: |alpha|, |beta| must be <= 1, got {a!r}, {b!r}")
            if not 0.0 <= t <= 2.0:
                raise ConfigurationError(f"eigen-coordinate {i}: t must lie in [0, 2], got {t!r}")

    def validate_corollary(self) -> None:
        self._check_exponents()
        if self.B is None:
            raise ConfigurationError("the weighted form needs an operator B")
        for name in ("B", "C", "D"):
            if not getattr(self, name).is_invertible():
                raise SingularOperatorError(f"{name} must be invertible, got {getattr(self, name).eigs}")
        if any(t < 0 for t in self.T.eigs):
            raise ConfigurationError(f"T must be nonnegative, got {self.T.eigs}")

    def to_dict(self) -> dict:
        doc = {"p": self.p, "q": self.q, "r": self.r, "C": list(self.C.eigs), "D": list(self.D.eigs), "T": list(self.T.eigs)}
        if self.B is not None:
            doc["B"] = list(self.B.eigs)
        return doc


@dataclass(frozen=True)
class EigRecord:
    index: int
    condition: str
    alpha: float
    beta: float
    t: float
    lhs: float
    rhs: float
    margin: float
    passed: bool


@dataclass(frozen=True)
class EigReport:
    """Per-eigenvalue records of conditions ``lhs <= rhs``; ``margin = rhs - lhs``."""

    records: tuple
    tol: float
    mapped: "EigReport | None" = None

    @property
    def passed(self) -> bool:
        return all(rec.passed for rec in self.records)

    @property
    def consistent(self) -> bool | None:
        """For weighted-form reports: does the mapped theorem-form verdict agree?"""
        return None if self.mapped is None else self.mapped.passed == self.passed

    def by_condition(self, name: str) -> list:
        return [rec for rec in self.records if rec.condition == name]

    def min_margin(self) -> float:
        return min((rec.margin for rec in self.records), default=math.inf)

    def to_dict(self) -> dict:
        doc = {"passed": self.passed, "tol": self.tol, "records": [asdict(r) for r in self.records]}
        if self.mapped is not None:
            doc["consistent"] = self.consistent
            doc["mapped"] = self.mapped.to_dict()
        return doc


def _record(index, condition, a, b, t, lhs, rhs, tol) -> EigRecord:
    margin = rhs - lhs if not (math.isinf(rhs) and math.isinf(lhs)) else 0.0
    return EigRecord(index, condition, a, b, t, lhs, rhs, margin, margin >= -tol)


# -- admissibility ---------------------------------------------------------------


def holder_bound(p: float, q: float, alpha: float, beta: float, t: float) -> float:
    """Largest admissible ``r - 1`` for one eigen-coordinate (``inf`` if ``alpha = beta = 0``)."""
    a2, b2 = alpha * alpha, beta * beta
    den = (q - 1.0) * a2 + (p - 1.0) * b2 + 2.0 * a2 * b2 * t
    num = (p - 1.0) * (q - 1.0) - a2 * b2 * t * t
    if den == 0.0:
        return math.inf
    return num / den


def _theorem_records(p, q, r, i, a, b, t, tol, ranges=False) -> list:
    recs = []
    if ranges:
        recs += [
            _record(i, "alpha_range", a, b, t, abs(a), 1.0, tol),
            _record(i, "beta_range", a, b, t, abs(b), 1.0, tol),
            _record(i, "t_range", a, b, t, t, 2.0, tol),
        ]
    recs.append(_record(i, "C_D_T", a, b, t, (t - 1.0) ** 2 * a * a * b * b, (1 - a * a) * (1 - b * b), tol))
    recs.append(_record(i, "holder", a, b, t, r - 1.0, holder_bound(p, q, a, b, t), tol))
    return recs


def check_admissible(cfg: HolderConfig, tol: float = TOL_CLOSED) -> EigReport:
    """Per eigenvalue: the ``C, D, T`` condition and the exponent condition.

    Raises
    ------
    ConfigurationError
        If the theorem-form invariants (ranges of ``C, D, T``, exponents > 1) fail.
    """
    cfg.validate_theorem()
    recs = []
    for i, (a, b, t) in enumerate(cfg.eigen_triples()):
        recs += _theorem_records(cfg.p, cfg.q, cfg.r, i, a, b, t, tol)
    return EigReport(tuple(recs), tol)


def equivalent_condition(cfg: HolderConfig, tol: float = TOL_CLOSED) -> EigReport:
    """Exponent condition in the harmonic form

        1 / ((r-1) + t) >= 1 / ((p-1)/alpha^2 + t) + 1 / ((q-1)/beta^2 + t)

    where a term whose eigenvalue is zero counts as 0.  The ``C, D, T``
    records are the same as in :func:`check_admissible`.
    """
    cfg.validate_theorem()
    recs = []
    p, q, r = cfg.p, cfg.q, cfg.r
    for i, (a, b, t) in enumerate(cfg.eigen_triples()):
        recs.append(_record(i, "C_D_T", a, b, t, (t - 1.0) ** 2 * a * a * b * b, (1 - a * a) * (1 - b * b), tol))
        first = 0.0 if a == 0 else 1.0 / ((p - 1.0) / (a * a) + t)
        second = 0.0 if b == 0 else 1.0 / ((q - 1.0) / (b * b) + t)
        recs.append(_record(i, "holder_equivalent", a, b, t, first + second, 1.0 / ((r - 1.0) + t), tol))
    return EigReport(tuple(recs), tol)


def max_admissible_r(p: float, q: float, C: DiagonalOperator, D: DiagonalOperator, T: DiagonalOperator) -> float:
    """``1 + min_i`` of the per-coordinate bound; ``inf`` when no coordinate binds."""
    return 1.0 + min(holder_bound(p, q, a, b, t) for a, b, t in zip(C, D, T))


def binding_index(p, q, C, D, T) -> int:
    bounds = [holder_bound(p, q, a, b, t) for a, b, t in zip(C, D, T)]
    return int(np.argmin(bounds))


# -- norms -----------------------------------------------------------------------


def lp_norm(f, p: float, method: str = "auto", *, rtol: float = 1e-9, samples: int = 10**6, seed: int = 0, jobs: int = 1) -> float:
    """Lp norm of a chaos expansion or exponential under the Gaussian measure.

    ``method`` is one of ``closed-form`` (exponentials only), ``quadrature``,
    ``mc`` or ``auto``.  Quadrature is exact for polynomials and even integer
    ``p``; otherwise the order is doubled until the estimate settles.
    """
    if method == "auto":
        method = "closed-form" if isinstance(f, ExponentialVector) else "quadrature"
    if method == "closed-form":
        if not isinstance(f, ExponentialVector):
            raise ConfigurationError("closed-form norms are available for exponential functions only")
        return f.lp_norm(p)
    if method == "mc":
        return mc_lp_norm(f, p, samples, seed, d=f.dim, jobs=jobs)[0]
    if method != "quadrature":
        raise ConfigurationError(f"unknown norm method {method!r}")
    if isinstance(f, ChaosExpansion):
        if p == 2.0:
            return f.l2_norm()
        if float(p).is_integer() and int(p) % 2 == 0:
            order = exact_order_for_polynomial(int(p), f.degree)
            return lp_norm_quadrature(f, p, gauss_hermite_rule(order), f.dim)
    return adaptive_lp_norm(f, p, f.dim, rtol=rtol).value


# -- the inequality on test functions -----------------------------------------------


def exp_log_ratio(cfg: HolderConfig, xi: ExponentialVector, eta: ExponentialVector) -> float:
    """``log( ||Gamma(C) phi_xi <>_T Gamma(D) phi_eta||_r / (||phi_xi||_p ||phi_eta||_q) )``.

    Uses ``phi_a <>_T phi_b = exp(<Ta, b>) phi_{a+b}`` and
    ``||phi_v||_l = exp((l-1)|v|^2/2)``.
    """
    x, y = xi.as_array(), eta.as_array()
    cx, dy = cfg.C.apply(x), cfg.D.apply(y)
    t = cfg.T.as_array()
    log_num = math.fsum(t * cx * dy) + 0.5 * (cfg.r - 1.0) * math.fsum((cx + dy) ** 2)
    log_den = 0.5 * (cfg.p - 1.0) * math.fsum(x * x) + 0.5 * (cfg.q - 1.0) * math.fsum(y * y)
    return log_num - log_den


def _ratio_from_log(log_ratio: float) -> float:
    return math.exp(log_ratio) if log_ratio <= LOG_RATIO_CEILING else math.inf


def wick_image(cfg: HolderConfig, phi: ChaosExpansion, psi: ChaosExpansion) -> ChaosExpansion:
    """``Gamma(C) phi <>_T Gamma(D) psi`` for polynomial inputs."""
    return t_wick_product(second_quantization(cfg.C, phi), second_quantization(cfg.D, psi), cfg.T)


def verify_inequality(cfg: HolderConfig, phi, psi, method: str = "auto", tol: float | None = None, **norm_kw) -> float:
    """Return ``||Gamma(C) phi <>_T Gamma(D) psi||_r / (||phi||_p ||psi||_q)``.

    Exponential pairs are handled entirely in closed form; polynomial pairs
    by the chaos algebra plus quadrature (or Monte Carlo) norms.

    Raises
    ------
    InadmissibleConfigError
        If the configuration fails :func:`check_admissible` at ``tol``.
    """
    if tol is None:
        tol = TOL_CLOSED if isinstance(phi, ExponentialVector) else TOL_QUAD
    report = check_admissible(cfg, tol)
    if not report.passed:
        raise InadmissibleConfigError("configuration is not admissible; use sharpness_probe for a witness")
    if isinstance(phi, ExponentialVector) and isinstance(psi, ExponentialVector):
        if method in ("auto", "closed-form"):
            return _ratio_from_log(exp_log_ratio(cfg, xi=phi, eta=psi))
        phi, psi = phi.expansion(20), psi.expansion(20)
    if not (isinstance(phi, ChaosExpansion) and isinstance(psi, ChaosExpansion)):
        raise TypeError("phi and psi must both be ChaosExpansion or both be ExponentialVector")
    if method == "closed-form":
        method = "quadrature"
    image = wick_image(cfg, phi, psi)
    num = lp_norm(image, cfg.r, method, **norm_kw)
    den = lp_norm(phi, cfg.p, method, **norm_kw) * lp_norm(psi, cfg.q, method, **norm_kw)
    return num / den


# -- sharpness ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentQuadratic:
    """``f(s) = a2 s^2 + a1 s + a0`` and its supremum data."""

    a2: float
    a1: float
    a0: float
    s_star: float
    f_star: float
    bounded: bool

    def __call__(self, s: float) -> float:
        return (self.a2 * s + self.a1) * s + self.a0


def probe_exponent(p: float, q: float, r: float, alpha: float, beta: float, t: float) -> ExponentQuadratic:
    """Maximize ``f(s) = (r-1)(s alpha + beta)^2/2 + t alpha beta s - (p-1)s^2/2 - (q-1)/2``.

    When ``f`` is bounded above, ``s_star`` is the vertex and ``f_star`` the
    supremum.  When it is not, ``s_star`` is a point with ``f(s_star) > 0``
    (so ``f_star`` is a finite positive witness value) and ``bounded`` is
    False.
    """
    a2 = 0.5 * ((r - 1.0) * alpha * alpha - (p - 1.0))
    a1 = (r - 1.0 + t) * alpha * beta
    a0 = 0.5 * ((r - 1.0) * beta * beta - (q - 1.0))
    if a2 < 0.0:
        s = -a1 / (2.0 * a2)
        f = (4.0 * a0 * a2 - a1 * a1) / (4.0 * a2)
        return ExponentQuadratic(a2, a1, a0, s, f, True)
    if a2 > 0.0:
        s = 1.0 + (abs(a1) + abs(a0)) / a2
    elif a1 != 0.0:
        s = math.copysign((abs(a0) + 1.0) / abs(a1), a1)
    else:
        return ExponentQuadratic(a2, a1, a0, 0.0, a0, True)
    quad = ExponentQuadratic(a2, a1, a0, s, 0.0, False)
    return ExponentQuadratic(a2, a1, a0, s, quad(s), False)


@dataclass(frozen=True)
class Witness:
    u: float
    log_ratio: float
    predicted_log_ratio: float
    ratio: float | None


@dataclass(frozen=True)
class SharpnessResult:
    index: int
    s_star: float
    f_star: float
    bounded: bool
    witnesses: tuple

    def to_dict(self) -> dict:
        return asdict(self)


def sharpness_probe(cfg: HolderConfig, u_list: Iterable[float], tol: float = TOL_CLOSED) -> SharpnessResult:
    """Certify unboundedness of a configuration that fails the exponent condition.

    Takes the eigen-coordinate with the largest probe exponent ``f_star``
    and, for each ``u``, evaluates the closed-form norm ratio of the pair
    ``phi_{s_star u e_i}``, ``phi_{u e_i}``; its logarithm equals
    ``u^2 f_star``, which grows without bound.

    Raises
    ------
    NoWitnessError
        If every coordinate satisfies the exponent condition.
    """
    cfg._check_exponents()
    best = None
    for i, (a, b, t) in enumerate(cfg.eigen_triples()):
        if cfg.r - 1.0 <= holder_bound(cfg.p, cfg.q, a, b, t) + tol:
            continue
        quad = probe_exponent(cfg.p, cfg.q, cfg.r, a, b, t)
        key = (not quad.bounded, quad.f_star)
        if best is None or key > best[0]:
            best = (key, i, quad)
    if best is None:
        raise NoWitnessError("the exponent condition holds for every eigenvalue; the map is bounded")
    _, i, quad = best
    witnesses = []
    for u in u_list:
        u = float(u)
        e = np.zeros(cfg.dim)
        e[i] = 1.0
        lr = exp_log_ratio(cfg, ExponentialVector(quad.s_star * u * e), ExponentialVector(u * e))
        ratio = math.exp(lr) if lr <= LOG_RATIO_CEILING else None
        witnesses.append(Witness(u, lr, u * u * quad.f_star, ratio))
    return SharpnessResult(i, quad.s_star, quad.f_star, quad.bounded, tuple(witnesses))


# -- proof identities --------------------------------------------------------------


@dataclass(frozen=True)
class JensenReport:
    r: float
    quantities: dict
    residuals: dict
    flags: dict
    objective_at_one: float
    grid_sup: float
    grid_argmax: tuple

    @property
    def sup_attained_at_one(self) -> bool:
        # the maximizer need not be unique (flat directions occur), so this
        # asks whether K = L = 1 reaches the grid supremum
        return self.objective_at_one >= self.grid_sup - 1e-12

    @property
    def max_residual(self) -> float:
        return max(abs(v) for v in self.residuals.values())

    def passed(self, tol: float = 1e-12, sup_tol: float = TOL_CLOSED) -> bool:
        return (
            self.max_residual <= tol
            and all(self.flags.values())
            and abs(self.objective_at_one - 1.0) <= sup_tol
            and self.grid_sup <= 1.0 + sup_tol
            and self.sup_attained_at_one
        )

    def to_dict(self) -> dict:
        return {**asdict(self), "sup_attained_at_one": self.sup_attained_at_one}


def step5_log_objective(K, L, q_: dict):
    """Log of the reduced supremand after the substitution ``K = pk``, ``L = ql``."""
    p, q, r, rp = q_["p"], q_["q"], q_["r"], q_["r_conj"]
    g, d, n, U, V, W = (q_[k] for k in ("gamma", "delta", "n", "U", "V", "W"))
    first = (g * g / p) * K + (d * d / q) * L + n * n
    second = (r * U * U / (p * q)) * K * L + (r * V * V / p) * K + (r * W * W / q) * L
    return (
        np.log(K) / (2 * p)
        + np.log(L) / (2 * q)
        - np.log(first) / (2 * rp)
        - np.log(second) / (2 * r)
    )


def jensen_identity_check(
    p: float,
    q: float,
    alpha: float,
    beta: float,
    t: float,
    grid_points: int = 201,
    grid_range: tuple = (0.1, 10.0),
) -> JensenReport:
    """Recompute the quantities of the one-dimensional supremum argument and their identities.

    Requires the boundary case ``(1 - alpha^2)(1 - beta^2) = (t-1)^2 alpha^2 beta^2``;
    ``r`` is the boundary exponent ``1 + holder_bound``.
    """
    margin = admissibility_margin(alpha, beta, t)
    if abs(margin) > 1e-10:
        raise NotOnBoundaryError(f"not on the equality manifold (margin {margin:.3g})")
    r = 1.0 + holder_bound(p, q, alpha, beta, t)
    if not (r > 1.0 and math.isfinite(r)):
        raise ConfigurationError(f"boundary exponent r = {r!r} is not a finite number > 1")
    gamma = sgn(alpha * beta * (t - 1.0)) * math.sqrt(max(0.0, 1.0 - alpha * alpha))
    delta = math.sqrt(max(0.0, 1.0 - beta * beta))
    a = 1.0 / r - alpha * alpha / p - beta * beta / q
    b = alpha * gamma / p + beta * delta / q
    c = 1.0 - gamma * gamma / p - delta * delta / q
    m = math.sqrt(max(a, 0.0))
    n = sgn(b) * math.sqrt(max(c, 0.0))
    U = alpha * delta - beta * gamma
    V = n * alpha + m * gamma
    W = n * beta + m * delta
    r_conj = r / (r - 1.0)
    qs = dict(p=p, q=q, r=r, r_conj=r_conj, gamma=gamma, delta=delta, a=a, b=b, c=c, m=m, n=n, U=U, V=V, W=W)
    residuals = {
        "b2_minus_ac": b * b - a * c,
        "mn_minus_b": m * n - b,
        "claim1": gamma * gamma / p + delta * delta / q + n * n - 1.0,
        "claim2": r * U * U / (p * q) + r * V * V / p + r * W * W / q - 1.0,
        "claim3_first": gamma * gamma / r_conj + U * U / q + V * V - 1.0,
        "claim3_second": delta * delta / r_conj + U * U / p + W * W - 1.0,
        "c_identity": c - r / (p * q) * ((q - 1) * alpha**2 + (p - 1) * beta**2 + 2 * alpha**2 * beta**2 * t),
    }
    flags = {"c_positive": c > 0.0, "a_nonnegative": a >= -1e-12}
    at_one = math.exp(float(step5_log_objective(1.0, 1.0, qs)))
    ks = np.geomspace(grid_range[0], grid_range[1], grid_points)
    K, L = np.meshgrid(ks, ks, indexing="ij")
    vals = step5_log_objective(K, L, qs)
    k = np.unravel_index(int(np.argmax(vals)), vals.shape)
    return JensenReport(r, qs, residuals, flags, at_one, math.exp(float(vals[k])), (float(K[k]), float(L[k])))


# -- weighted form and its specializations ---------------------------------------------


def corollary_mapped_config(cfg: HolderConfig) -> HolderConfig:
    """Theorem-form instance ``(B C^-1, B D^-1, T B^-2)`` equivalent to a weighted instance."""
    cfg.validate_corollary()
    B = cfg.B
    Binv = B.inverse()
    return HolderConfig(cfg.p, cfg.q, cfg.r, B @ cfg.C.inverse(), B @ cfg.D.inverse(), cfg.T @ Binv @ Binv)


def check_corollary(cfg: HolderConfig, tol: float = TOL_CLOSED) -> EigReport:
    """Weighted-form conditions per eigenvalue plus the mapped theorem-form verdict.

    Conditions (all eigenvalue-wise): ``|B| >= sqrt(T/2)``, ``|C| >= |B|``,
    ``|D| >= |B|``, ``(C^2 - B^2)(D^2 - B^2) >= (T - B^2)^2`` and
    ``1/((r-1)B^2 + T) >= 1/((p-1)C^2 + T) + 1/((q-1)D^2 + T)``.
    Records carry ``alpha = c_i``, ``beta = d_i``.
    """
    cfg.validate_corollary()
    p, q, r = cfg.p, cfg.q, cfg.r
    recs = []
    for i, (bb, c, d, t) in enumerate(zip(cfg.B, cfg.C, cfg.D, cfg.T)):
        b2, c2, d2 = bb * bb, c * c, d * d
        recs += [
            _record(i, "B_T", c, d, t, math.sqrt(t / 2.0), abs(bb), tol),
            _record(i, "C_B", c, d, t, abs(bb), abs(c), tol),
            _record(i, "D_B", c, d, t, abs(bb), abs(d), tol),
            _record(i, "B_C_D_T", c, d, t, (t - b2) ** 2, (c2 - b2) * (d2 - b2), tol),
            _record(
                i, "holder_weighted", c, d, t,
                1.0 / ((p - 1.0) * c2 + t) + 1.0 / ((q - 1.0) * d2 + t),
                1.0 / ((r - 1.0) * b2 + t),
                tol,
            ),
        ]
    m = corollary_mapped_config(cfg)
    mapped = []
    for i, (a, b, t) in enumerate(m.eigen_triples()):
        mapped += _theorem_records(p, q, r, i, a, b, t, tol, ranges=True)
    return EigReport(tuple(recs), tol, mapped=EigReport(tuple(mapped), tol))


def weighted_exp_log_ratio(cfg: HolderConfig, xi: ExponentialVector, eta: ExponentialVector) -> float:
    """``log(||phi_xi <>_T phi_eta||_{r,B} / (||phi_xi||_{p,C} ||phi_eta||_{q,D}))``."""
    x, y = xi.as_array(), eta.as_array()
    s = cfg.B.apply(x + y)
    log_num = math.fsum(cfg.T.as_array() * x * y) + 0.5 * (cfg.r - 1.0) * math.fsum(s * s)
    cx, dy = cfg.C.apply(x), cfg.D.apply(y)
    log_den = 0.5 * (cfg.p - 1.0) * math.fsum(cx * cx) + 0.5 * (cfg.q - 1.0) * math.fsum(dy * dy)
    return log_num - log_den


def verify_weighted_inequality(cfg: HolderConfig, phi, psi, method: str = "auto", tol: float | None = None, **norm_kw) -> float:
    """``||phi <>_T psi||_{r,B} / (||phi||_{p,C} ||psi||_{q,D})`` with ``||f||_{l,A} = ||Gamma(A) f||_l``."""
    if tol is None:
        tol = TOL_CLOSED if isinstance(phi, ExponentialVector) else TOL_QUAD
    if not check_corollary(cfg, tol).passed:
        raise InadmissibleConfigError("weighted-form conditions fail for this configuration")
    if isinstance(phi, ExponentialVector) and isinstance(psi, ExponentialVector):
        if method in ("auto", "closed-form"):
            return _ratio_from_log(weighted_exp_log_ratio(cfg, phi, psi))
        phi, psi = phi.expansion(20), psi.expansion(20)
    if method == "closed-form":
        method = "quadrature"
    image = second_quantization(cfg.B, t_wick_product(phi, psi, cfg.T))
    num = lp_norm(image, cfg.r, method, **norm_kw)
    den = lp_norm(second_quantization(cfg.C, phi), cfg.p, method, **norm_kw) * lp_norm(
        second_quantization(cfg.D, psi), cfg.q, method, **norm_kw
    )
    return num / den


def nelson_check(p: float, r: float, C: DiagonalOperator, phi, method: str = "auto", tol: float = TOL_CLOSED, **norm_kw) -> float:
    """Hypercontractivity ratio ``||phi||_r / ||Gamma(C) phi||_p`` under ``|C| >= sqrt((r-1)/(p-1))``.

    Raises
    ------
    InadmissibleConfigError
        Naming the first eigenvalue below the threshold.
    """
    if not (p > 1.0 and r > 1.0):
        raise ConfigurationError(f"p and r must exceed 1, got {p!r}, {r!r}")
    if C.dim != phi.dim:
        raise DimensionMismatchError(f"C has dim {C.dim}, phi has dim {phi.dim}")
    threshold = math.sqrt((r - 1.0) / (p - 1.0))
    for i, c in enumerate(C.eigs):
        if abs(c) < threshold - tol:
            raise InadmissibleConfigError(
                f"eigenvalue {i}: |c| = {abs(c)!r} is below sqrt((r-1)/(p-1)) = {threshold!r}"
            )
    if isinstance(phi, ExponentialVector) and method in ("auto", "closed-form"):
        return _ratio_from_log(phi.log_lp_norm(r) - phi.transformed(C).log_lp_norm(p))
    if isinstance(phi, ExponentialVector):
        phi = phi.expansion(20)
    if method == "closed-form":
        method = "quadrature"
    return lp_norm(phi, r, method, **norm_kw) / lp_norm(second_quantization(C, phi), p, method, **norm_kw)
