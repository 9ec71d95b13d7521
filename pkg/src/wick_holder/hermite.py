"""Probabilists' Hermite polynomials and multi-index combinatorics.

The polynomials ``h_n`` are orthogonal for the standard Gaussian weight
``exp(-x**2 / 2) / sqrt(2 pi)`` with ``E[h_m h_n] = n! delta_mn``.  A
multi-index is a plain tuple of nonnegative ints; the product-Hermite basis
element ``H_alpha(x) = prod_i h_{alpha_i}(x_i)``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import CapacityError

DEFAULT_DEGREE_CAP = 40

MultiIndex = tuple  # tuple[int, ...]


def _check_cap(n: int, cap: int) -> None:
    if n < 0:
        raise ValueError(f"Hermite degree must be nonnegative, got {n}")
    if n > cap:
        raise CapacityError(f"degree {n} exceeds the degree cap {cap}")


def hermite_eval(n: int, x, cap: int = DEFAULT_DEGREE_CAP):
    """Evaluate ``h_n`` at ``x`` (scalar or array) by the three-term recurrence."""
    _check_cap(n, cap)
    scalar = np.isscalar(x)
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return float(h_prev) if scalar else h_prev
    h = x.copy()
    for k in range(1, n):
        h_prev, h = h, x * h - k * h_prev
    return float(h) if scalar else h


def hermite_table(x, nmax: int, cap: int = DEFAULT_DEGREE_CAP) -> np.ndarray:
    """Return ``h_0(x), ..., h_nmax(x)`` stacked along a new leading axis."""
    _check_cap(nmax, cap)
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = x
    for k in range(1, nmax):
        out[k + 1] = x * out[k] - k * out[k - 1]
    return out


@lru_cache(maxsize=4096)
def _linearize_exact(m: int, n: int) -> tuple:
    return tuple(
        (m + n - 2 * r, math.factorial(r) * math.comb(m, r) * math.comb(n, r))
        for r in range(min(m, n) + 1)
    )


def hermite_linearize(m: int, n: int, cap: int = DEFAULT_DEGREE_CAP) -> list[tuple[int, float]]:
    """Expand ``h_m * h_n`` in the Hermite basis.

    Returns ``[(k, coeff), ...]`` with degrees ``m+n, m+n-2, ...`` in that
    order, where ``coeff = r! C(m, r) C(n, r)`` for ``k = m + n - 2r``.
    All coefficients are strictly positive.

    Raises
    ------
    CapacityError
        If ``m``, ``n`` or ``m + n`` exceeds ``cap``.
    """
    _check_cap(m, cap)
    _check_cap(n, cap)
    _check_cap(m + n, cap)
    return [(k, float(c)) for k, c in _linearize_exact(m, n)]


def check_multiindex(alpha: Sequence[int], dim: int | None = None) -> MultiIndex:
    alpha = tuple(int(a) for a in alpha)
    if any(a < 0 for a in alpha):
        raise ValueError(f"multi-index entries must be nonnegative: {alpha}")
    if dim is not None and len(alpha) != dim:
        raise ValueError(f"multi-index {alpha} does not have length {dim}")
    return alpha


def degree(alpha: Sequence[int]) -> int:
    return sum(alpha)


def index_sub(alpha: Sequence[int], beta: Sequence[int]) -> MultiIndex:
    """Componentwise ``alpha - beta``; defined only when every entry stays >= 0."""
    out = tuple(a - b for a, b in zip(alpha, beta))
    if any(v < 0 for v in out):
        raise ValueError(f"{tuple(alpha)} - {tuple(beta)} has a negative entry")
    return out


def index_add(alpha: Sequence[int], beta: Sequence[int]) -> MultiIndex:
    return tuple(a + b for a, b in zip(alpha, beta))


def multiindex_combinatorics(alpha: Sequence[int], r: Sequence[int]) -> float:
    """``prod_i C(alpha_i, r_i)`` for ``r <= alpha`` componentwise."""
    return float(math.prod(math.comb(a, k) for a, k in zip(alpha, r)))


def multiindex_factorial(r: Sequence[int]) -> float:
    """``r! = prod_i r_i!``."""
    return float(math.prod(math.factorial(k) for k in r))


def multiindices_up_to(dim: int, max_degree: int):
    """Yield every multi-index of length ``dim`` and total degree <= ``max_degree``."""
    if dim == 0:
        yield ()
        return
    for first in range(max_degree + 1):
        for rest in multiindices_up_to(dim - 1, max_degree - first):
            yield (first,) + rest
