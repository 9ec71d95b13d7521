"""Operators diagonal in the fixed coordinate basis, stored as eigenvalue lists."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConfigurationError, DimensionMismatchError, SingularOperatorError


@dataclass(frozen=True)
class DiagonalOperator:
    """A diagonal operator ``e_i -> eigs[i] * e_i`` on ``R^d``.

    The plain constructor is unconstrained; ``as_T`` and ``as_contraction``
    enforce the ranges required by the integral representation.
    """

    eigs: tuple

    def __post_init__(self):
        eigs = tuple(float(v) for v in self.eigs)
        if not eigs:
            raise ConfigurationError("a diagonal operator needs at least one eigenvalue")
        if not all(math.isfinite(v) for v in eigs):
            raise ConfigurationError(f"eigenvalues must be finite: {eigs}")
        object.__setattr__(self, "eigs", eigs)

    @classmethod
    def identity(cls, dim: int) -> "DiagonalOperator":
        return cls((1.0,) * dim)

    @classmethod
    def zero(cls, dim: int) -> "DiagonalOperator":
        return cls((0.0,) * dim)

    @classmethod
    def scalar(cls, value: float, dim: int) -> "DiagonalOperator":
        return cls((float(value),) * dim)

    @classmethod
    def as_T(cls, eigs: Iterable[float]) -> "DiagonalOperator":
        op = cls(tuple(eigs))
        bad = [t for t in op.eigs if not 0.0 <= t <= 2.0]
        if bad:
            raise ConfigurationError(f"T eigenvalues must lie in [0, 2], got {bad}")
        return op

    @classmethod
    def as_contraction(cls, eigs: Iterable[float]) -> "DiagonalOperator":
        op = cls(tuple(eigs))
        bad = [v for v in op.eigs if abs(v) > 1.0]
        if bad:
            raise ConfigurationError(f"contraction eigenvalues must satisfy |v| <= 1, got {bad}")
        return op

    @property
    def dim(self) -> int:
        return len(self.eigs)

    def __len__(self):
        return len(self.eigs)

    def __iter__(self):
        return iter(self.eigs)

    def __getitem__(self, i):
        return self.eigs[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.eigs)

    def _check_dim(self, other: "DiagonalOperator") -> None:
        if other.dim != self.dim:
            raise DimensionMismatchError(f"operator dims differ: {self.dim} vs {other.dim}")

    def compose(self, other: "DiagonalOperator") -> "DiagonalOperator":
        """The product ``self @ other`` (commutative for diagonal operators)."""
        self._check_dim(other)
        return DiagonalOperator(tuple(a * b for a, b in zip(self.eigs, other.eigs)))

    __matmul__ = compose

    def scale(self, c: float) -> "DiagonalOperator":
        return DiagonalOperator(tuple(c * v for v in self.eigs))

    def is_invertible(self) -> bool:
        return all(v != 0.0 for v in self.eigs)

    def inverse(self) -> "DiagonalOperator":
        if not self.is_invertible():
            raise SingularOperatorError(f"operator has a zero eigenvalue: {self.eigs}")
        return DiagonalOperator(tuple(1.0 / v for v in self.eigs))

    def sqrt(self) -> "DiagonalOperator":
        if any(v < 0 for v in self.eigs):
            raise ConfigurationError(f"square root of an operator with negative eigenvalue: {self.eigs}")
        return DiagonalOperator(tuple(math.sqrt(v) for v in self.eigs))

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.dim:
            raise DimensionMismatchError(f"vector of length {v.shape[-1]} for operator of dim {self.dim}")
        return v * self.as_array()

    def to_dict(self) -> dict:
        return {"eigs": list(self.eigs)}

    @classmethod
    def from_dict(cls, doc: dict) -> "DiagonalOperator":
        return cls(tuple(doc["eigs"]))
