"""Chaos expansions on ``R^d`` under the standard Gaussian measure.

A :class:`ChaosExpansion` is a finite linear combination of product-Hermite
basis elements ``H_alpha``.  This module provides the second quantization
``Gamma(B)`` and the product family

* ``pointwise_product``: the ordinary product of random variables,
* ``wick_product``: ``H_alpha <> H_beta = H_{alpha+beta}``,
* ``t_wick_product``: ``Gamma(T^{-1/2})[Gamma(T^{1/2}) phi * Gamma(T^{1/2}) psi]``,
  which interpolates between the two (``T = I`` and ``T = 0``),

together with the renormalized exponentials
``phi_xi(x) = exp(<x, xi> - |xi|^2 / 2)`` in closed form
(:class:`ExponentialVector`) and as truncated expansions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import CapacityError, DimensionMismatchError, ConfigurationError
from .hermite import (
    DEFAULT_DEGREE_CAP,
    check_multiindex,
    hermite_linearize,
    hermite_table,
    multiindex_factorial,
    multiindices_up_to,
)
from .operators import DiagonalOperator


@dataclass(frozen=True)
class ChaosExpansion:
    """Sparse map ``multi-index -> coefficient`` of dimension ``dim``.

    Exact zeros are dropped on construction so that equality of two
    expansions is equality of their canonical term dictionaries.
    """

    dim: int
    terms: Mapping = field(default_factory=dict)
    degree_cap: int = DEFAULT_DEGREE_CAP

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigurationError(f"dimension must be positive, got {self.dim}")
        clean = {}
        for alpha, c in dict(self.terms).items():
            alpha = check_multiindex(alpha, self.dim)
            if sum(alpha) > self.degree_cap:
                raise CapacityError(f"term {alpha} exceeds degree cap {self.degree_cap}")
            c = float(c)
            if c != 0.0:
                clean[alpha] = clean.get(alpha, 0.0) + c
                if clean[alpha] == 0.0:
                    del clean[alpha]
        object.__setattr__(self, "terms", clean)

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, dim: int, degree_cap: int = DEFAULT_DEGREE_CAP) -> "ChaosExpansion":
        return cls(dim, {}, degree_cap)

    @classmethod
    def constant(cls, value: float, dim: int, degree_cap: int = DEFAULT_DEGREE_CAP) -> "ChaosExpansion":
        return cls(dim, {(0,) * dim: value}, degree_cap)

    @classmethod
    def basis(cls, alpha, coeff: float = 1.0, degree_cap: int = DEFAULT_DEGREE_CAP) -> "ChaosExpansion":
        alpha = tuple(alpha)
        return cls(len(alpha), {alpha: coeff}, degree_cap)

    # -- structure --------------------------------------------------------

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self.terms), default=0)

    def coeff(self, alpha) -> float:
        return self.terms.get(tuple(alpha), 0.0)

    @property
    def mean(self) -> float:
        """Expectation under the Gaussian measure, i.e. the ``H_0`` coefficient."""
        return self.coeff((0,) * self.dim)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, ChaosExpansion):
            return NotImplemented
        return self.dim == other.dim and self.terms == other.terms

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms.items())))

    def _like(self, terms, degree_cap=None) -> "ChaosExpansion":
        return ChaosExpansion(self.dim, terms, self.degree_cap if degree_cap is None else degree_cap)

    # -- linear structure -------------------------------------------------

    def __add__(self, other: "ChaosExpansion") -> "ChaosExpansion":
        _check_same_dim(self, other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out.get(a, 0.0) + c
        return self._like(out, max(self.degree_cap, other.degree_cap))

    def __neg__(self):
        return self._like({a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, ChaosExpansion):
            return NotImplemented
        return self._like({a: scalar * c for a, c in self.terms.items()})

    __rmul__ = __mul__

    # -- evaluation and norms ---------------------------------------------

    def evaluate(self, x) -> float | np.ndarray:
        """Evaluate at one point (shape ``(d,)``) or a batch (shape ``(n, d)``)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatchError(f"point of length {x.shape[-1]} for expansion of dim {self.dim}")
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        out = np.zeros(pts.shape[0])
        if self.terms:
            nmax = max(max(a) for a in self.terms)
            tables = [hermite_table(pts[:, i], nmax, cap=max(nmax, self.degree_cap)) for i in range(self.dim)]
            for alpha, c in self.terms.items():
                val = np.full(pts.shape[0], c)
                for i, k in enumerate(alpha):
                    if k:
                        val = val * tables[i][k]
                out += val
        return float(out[0]) if single else out

    __call__ = evaluate

    def l2_norm(self) -> float:
        """``sqrt(sum_alpha alpha! c_alpha^2)``."""
        return math.sqrt(math.fsum(multiindex_factorial(a) * c * c for a, c in self.terms.items()))

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "cap": self.degree_cap,
            "terms": [{"index": list(a), "coeff": c} for a, c in sorted(self.terms.items())],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ChaosExpansion":
        dim = int(doc["dim"])
        cap = int(doc.get("cap", DEFAULT_DEGREE_CAP))
        terms: dict = {}
        for t in doc.get("terms", []):
            a = tuple(t["index"])
            terms[a] = terms.get(a, 0.0) + float(t["coeff"])
        return cls(dim, terms, cap)


def _check_same_dim(a, b) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimensions differ: {a.dim} vs {b.dim}")


def _product_cap(phi: ChaosExpansion, psi: ChaosExpansion) -> int:
    _check_same_dim(phi, psi)
    cap = min(phi.degree_cap, psi.degree_cap)
    if phi.degree + psi.degree > cap:
        raise CapacityError(
            f"product degree {phi.degree + psi.degree} exceeds degree cap {cap}; refusing to truncate"
        )
    return cap


def max_coeff_diff(a: ChaosExpansion, b: ChaosExpansion) -> float:
    """Largest absolute coefficient difference between two expansions."""
    _check_same_dim(a, b)
    keys = set(a.terms) | set(b.terms)
    return max((abs(a.coeff(k) - b.coeff(k)) for k in keys), default=0.0)


def max_rel_coeff_diff(a: ChaosExpansion, b: ChaosExpansion) -> float:
    """Largest coefficient difference relative to ``max(|a_k|, |b_k|)``."""
    _check_same_dim(a, b)
    worst = 0.0
    for k in set(a.terms) | set(b.terms):
        x, y = a.coeff(k), b.coeff(k)
        worst = max(worst, abs(x - y) / max(abs(x), abs(y)))
    return worst


# -- second quantization ------------------------------------------------------


def second_quantization(B: DiagonalOperator, phi: ChaosExpansion) -> ChaosExpansion:
    """``Gamma(B)``: scale ``H_alpha`` by ``prod_i b_i**alpha_i``."""
    if B.dim != phi.dim:
        raise DimensionMismatchError(f"operator dim {B.dim} vs expansion dim {phi.dim}")
    b = B.eigs
    out = {}
    for alpha, c in phi.terms.items():
        s = c
        for bi, k in zip(b, alpha):
            if k:
                s *= bi**k
        out[alpha] = s
    return phi._like(out)


# -- products -----------------------------------------------------------------
#
# Contributions to each output coefficient are summed with fsum (correctly
# rounded, hence independent of order).  Integer weights are formed exactly
# before touching the coefficients, so the interpolation endpoints and
# commutativity hold bit for bit.


def _collect(dim: int, contributions: dict, cap: int) -> ChaosExpansion:
    return ChaosExpansion(dim, {g: math.fsum(v) for g, v in contributions.items()}, cap)


def wick_product(phi: ChaosExpansion, psi: ChaosExpansion) -> ChaosExpansion:
    """Classic Wick product: indices add, no contractions."""
    cap = _product_cap(phi, psi)
    out: dict = {}
    for a, c in phi.terms.items():
        for b, d in psi.terms.items():
            g = tuple(x + y for x, y in zip(a, b))
            out.setdefault(g, []).append(c * d)
    return _collect(phi.dim, out, cap)


def pointwise_product(phi: ChaosExpansion, psi: ChaosExpansion) -> ChaosExpansion:
    """Ordinary product, linearized coordinate by coordinate."""
    cap = _product_cap(phi, psi)
    out: dict = {}
    for a, c in phi.terms.items():
        for b, d in psi.terms.items():
            factors = [hermite_linearize(m, n, cap) for m, n in zip(a, b)]
            for combo in itertools.product(*factors):
                g = tuple(k for k, _ in combo)
                weight = math.prod(coef for _, coef in combo)
                out.setdefault(g, []).append((c * d) * weight)
    return _collect(phi.dim, out, cap)


def t_wick_product(phi: ChaosExpansion, psi: ChaosExpansion, T: DiagonalOperator) -> ChaosExpansion:
    """T-Wick product by its closed combinatorial form.

    ``H_a <>_T H_b = sum_{r <= min(a, b)} t**r r! C(a, r) C(b, r) H_{a+b-2r}``
    with ``t**r = prod_i t_i**r_i``.  Zero eigenvalues simply kill every
    contraction in that coordinate, which is the ``T + eps P_ker`` limit.
    """
    cap = _product_cap(phi, psi)
    if T.dim != phi.dim:
        raise DimensionMismatchError(f"T has dim {T.dim}, expansions have dim {phi.dim}")
    t = T.eigs
    if any(v < 0 for v in t):
        raise ConfigurationError(f"T must be nonnegative, got {t}")
    factors: dict = {}

    def contractions(i: int, m: int, n: int) -> list:
        # (output degree, r! C(m, r) C(n, r), t_i**r) for coordinate i
        key = (i, m, n)
        if key not in factors:
            top = min(m, n) if t[i] != 0.0 else 0
            factors[key] = [
                (m + n - 2 * r, float(math.factorial(r) * math.comb(m, r) * math.comb(n, r)), t[i] ** r)
                for r in range(top + 1)
            ]
        return factors[key]

    out: dict = {}
    for a, c in phi.terms.items():
        for b, d in psi.terms.items():
            cd = c * d
            per_coord = [contractions(i, m, n) for i, (m, n) in enumerate(zip(a, b))]
            for combo in itertools.product(*per_coord):
                w = cd * math.prod(f[1] for f in combo)
                for f in combo:
                    if f[2] != 1.0:
                        w *= f[2]
                out.setdefault(tuple(f[0] for f in combo), []).append(w)
    return _collect(phi.dim, out, cap)


def t_wick_by_definition(phi: ChaosExpansion, psi: ChaosExpansion, T: DiagonalOperator) -> ChaosExpansion:
    """``Gamma(1/sqrt T)[Gamma(sqrt T) phi * Gamma(sqrt T) psi]``, for ``T > 0``."""
    if any(v <= 0 for v in T.eigs):
        raise ConfigurationError("the three-step definition needs strictly positive T")
    root = T.sqrt()
    prod = pointwise_product(second_quantization(root, phi), second_quantization(root, psi))
    return second_quantization(root.inverse(), prod)


def functorial_transport(B: DiagonalOperator, T: DiagonalOperator, phi: ChaosExpansion, psi: ChaosExpansion):
    """Both sides of ``Gamma(B)(phi <>_T psi) = Gamma(B)phi <>_{T B^-2} Gamma(B)psi``.

    Each side is computed along its own path; the caller compares them.
    """
    Binv = B.inverse()
    left = second_quantization(B, t_wick_product(phi, psi, T))
    right = t_wick_product(second_quantization(B, phi), second_quantization(B, psi), T @ Binv @ Binv)
    return left, right


# -- exponential functions ------------------------------------------------------


@dataclass(frozen=True)
class ExponentialVector:
    """Closed-form renormalized exponential ``phi_xi``."""

    xi: tuple

    def __post_init__(self):
        xi = tuple(float(v) for v in np.ravel(self.xi))
        if not xi:
            raise ConfigurationError("an exponential vector needs at least one coordinate")
        object.__setattr__(self, "xi", xi)

    @property
    def dim(self) -> int:
        return len(self.xi)

    def as_array(self) -> np.ndarray:
        return np.array(self.xi)

    @property
    def norm_sq(self) -> float:
        return math.fsum(v * v for v in self.xi)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatchError(f"point of length {x.shape[-1]} for exponential of dim {self.dim}")
        val = np.exp(x @ self.as_array() - 0.5 * self.norm_sq)
        return float(val) if np.ndim(val) == 0 else val

    __call__ = evaluate

    def __add__(self, other: "ExponentialVector") -> "ExponentialVector":
        _check_same_dim(self, other)
        return ExponentialVector(tuple(a + b for a, b in zip(self.xi, other.xi)))

    def transformed(self, B: DiagonalOperator) -> "ExponentialVector":
        """``Gamma(B) phi_xi = phi_{B xi}``."""
        return ExponentialVector(tuple(B.apply(self.xi)))

    def lp_norm(self, l: float) -> float:
        return exp_lp_norm(self, l)

    def log_lp_norm(self, l: float) -> float:
        if l < 1:
            raise ValueError(f"norm exponent must be >= 1, got {l}")
        return 0.5 * (l - 1.0) * self.norm_sq

    def expansion(self, cap: int, degree_cap: int = DEFAULT_DEGREE_CAP) -> ChaosExpansion:
        return exp_expansion(self, cap, degree_cap)


def t_wick_exponentials(xi: ExponentialVector, eta: ExponentialVector, T: DiagonalOperator):
    """``phi_xi <>_T phi_eta = exp(<T xi, eta>) phi_{xi + eta}``; returns ``(scale, xi + eta)``."""
    _check_same_dim(xi, eta)
    if T.dim != xi.dim:
        raise DimensionMismatchError(f"T has dim {T.dim}, vectors have dim {xi.dim}")
    inner = math.fsum(t * a * b for t, a, b in zip(T.eigs, xi.xi, eta.xi))
    return math.exp(inner), xi + eta


def exp_expansion(xi: ExponentialVector, cap: int, degree_cap: int = DEFAULT_DEGREE_CAP) -> ChaosExpansion:
    """Truncation of ``phi_xi`` to total degree ``cap``: ``c_alpha = prod xi_i**alpha_i / alpha_i!``."""
    if cap > degree_cap:
        raise CapacityError(f"truncation degree {cap} exceeds degree cap {degree_cap}")
    if cap < 0:
        raise ValueError("truncation degree must be nonnegative")
    terms = {}
    for alpha in multiindices_up_to(xi.dim, cap):
        c = 1.0
        for v, k in zip(xi.xi, alpha):
            if k:
                c *= v**k / math.factorial(k)
        if c != 0.0:
            terms[alpha] = c
    return ChaosExpansion(xi.dim, terms, degree_cap)


def exp_truncation_error(xi: ExponentialVector, cap: int) -> float:
    """L2 norm of the tail discarded by ``exp_expansion``: ``sqrt(sum_{n > cap} |xi|^{2n} / n!)``."""
    s = xi.norm_sq
    if s == 0.0:
        return 0.0
    n = cap + 1
    term = math.exp(n * math.log(s) - math.lgamma(n + 1))
    total = 0.0
    while True:
        total += term
        n += 1
        term *= s / n
        if n > 2 * s and term <= total * 1e-17:
            break
    return math.sqrt(total)


def exp_lp_norm(xi: ExponentialVector, l: float) -> float:
    """``||phi_xi||_l = exp((l - 1) |xi|^2 / 2)`` for ``l >= 1``."""
    return math.exp(xi.log_lp_norm(l))


def to_expansion(f, cap: int = 20) -> ChaosExpansion:
    """Coerce an expansion or exponential vector to a chaos expansion."""
    if isinstance(f, ChaosExpansion):
        return f
    if isinstance(f, ExponentialVector):
        return exp_expansion(f, cap)
    raise TypeError(f"cannot convert {type(f).__name__} to a chaos expansion")
