"""Group arithmetic in exponential coordinates of the first kind.

Two layers of API: ``GroupElement`` for single elements, and ``*_batch``
functions on ``(B, n)`` float arrays that route through the compiled
kernels.  Inversion is coordinate negation, never a series.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .algebra import GradedLieAlgebra
from .bch import bch_exact
from .errors import AlgebraMismatch, DimensionMismatch, DomainViolation


@dataclass(frozen=True, eq=False)
class GroupElement:
    algebra: GradedLieAlgebra
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        if c.shape != (self.algebra.dim,):
            raise DimensionMismatch(f"expected {self.algebra.dim} coordinates, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise DomainViolation("group element coordinates must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coords", c)

    @classmethod
    def identity(cls, algebra: GradedLieAlgebra) -> GroupElement:
        return cls(algebra, np.zeros(algebra.dim))

    def __mul__(self, other: GroupElement) -> GroupElement:
        return multiply(self, other)

    def __invert__(self) -> GroupElement:
        return inverse(self)

    def __eq__(self, other):
        return (isinstance(other, GroupElement) and other.algebra is self.algebra
                and np.array_equal(self.coords, other.coords))

    def __hash__(self):
        return hash((id(self.algebra), self.coords.tobytes()))

    def __repr__(self):
        return f"GroupElement({np.array2string(self.coords, precision=6)})"

    def layer(self, k: int) -> np.ndarray:
        return self.coords[self.algebra.grading.layer_slice(k)]


def _same(x: GroupElement, y: GroupElement) -> GradedLieAlgebra:
    if x.algebra is not y.algebra and not x.algebra.same_structure(y.algebra):
        raise AlgebraMismatch("elements belong to different algebras")
    return x.algebra


# -- batch primitives ---------------------------------------------------------


def _rows(algebra: GradedLieAlgebra, X) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.shape[-1] != algebra.dim:
        raise DimensionMismatch(f"expected last axis {algebra.dim}, got {X.shape[-1]}")
    return X


def multiply_batch(algebra: GradedLieAlgebra, X, Y) -> np.ndarray:
    """Row-wise products of ``(..., n)`` coordinate arrays (broadcasting)."""
    X = _rows(algebra, X)
    Y = _rows(algebra, Y)
    X, Y = np.broadcast_arrays(X, Y)
    shape = X.shape
    Xf = np.ascontiguousarray(X.reshape(-1, algebra.dim))
    Yf = np.ascontiguousarray(Y.reshape(-1, algebra.dim))
    I, J, K, C = algebra.sparse_arrays
    if len(I) == 0:
        return (Xf + Yf).reshape(shape)
    prog = algebra.bch
    out = kernels.bch_multiply(Xf, Yf, I, J, K, C, prog.leaf, prog.operand, prog.coef)
    return np.asarray(out).reshape(shape)


def inverse_batch(X) -> np.ndarray:
    return -np.asarray(X, dtype=float)


def dilation_factors(algebra: GradedLieAlgebra, lam: float) -> np.ndarray:
    return np.asarray(lam, float) ** np.asarray(algebra.grading.layers, float)


def dilate_batch(algebra: GradedLieAlgebra, lam: float, X) -> np.ndarray:
    return np.asarray(X, float) * dilation_factors(algebra, lam)


def left_translate_batch(algebra: GradedLieAlgebra, g, X) -> np.ndarray:
    return multiply_batch(algebra, np.broadcast_to(np.asarray(g, float), np.shape(X)), X)


def compose_batch(algebra: GradedLieAlgebra, factors) -> np.ndarray:
    """``F_0 F_1 ... F_{m-1}`` row-wise, for a sequence of ``(B, n)`` arrays."""
    out = np.asarray(factors[0], float)
    for F in factors[1:]:
        out = multiply_batch(algebra, out, F)
    return out


# -- element API ----------------------------------------------------------------


def multiply(x: GroupElement, y: GroupElement) -> GroupElement:
    alg = _same(x, y)
    return GroupElement(x.algebra, multiply_batch(alg, x.coords[None], y.coords[None])[0])


def multiply_exact(algebra: GradedLieAlgebra, x, y) -> list[Fraction]:
    return bch_exact(algebra, x, y)


def inverse(x: GroupElement) -> GroupElement:
    return GroupElement(x.algebra, -x.coords)


def dilate(lam: float, x: GroupElement) -> GroupElement:
    return GroupElement(x.algebra, dilate_batch(x.algebra, lam, x.coords))


def group_commutator(x: GroupElement, y: GroupElement) -> GroupElement:
    """``x y x^-1 y^-1``."""
    _same(x, y)
    return multiply(multiply(x, y), multiply(inverse(x), inverse(y)))


def abelianization_project(x) -> np.ndarray:
    """Layer-1 block of ``x`` (a ``GroupElement`` or ``(algebra, coords)``)."""
    return np.array(x.coords[x.algebra.grading.layer_slice(1)])


def project_batch(algebra: GradedLieAlgebra, X) -> np.ndarray:
    return np.asarray(X)[..., algebra.grading.layer_slice(1)]


def psi(x: GroupElement, y: GroupElement) -> GroupElement:
    """``x y - x`` for horizontal ``x`` and ``y`` in the commutator block."""
    alg = _same(x, y)
    d1 = alg.layer_dims[0]
    if np.any(x.coords[d1:] != 0):
        raise DomainViolation("psi needs x in the first layer")
    if np.any(y.coords[:d1] != 0):
        raise DomainViolation("psi needs y with vanishing first layer")
    out = multiply(x, y).coords - x.coords
    out[:d1] = 0.0  # exact: layer 1 of xy is x1 + 0
    return GroupElement(alg, out)


def psi_batch(algebra: GradedLieAlgebra, x, Y) -> np.ndarray:
    """``psi_x`` applied to rows of ``Y`` (commutator coordinates, length n - d1)."""
    d1 = algebra.layer_dims[0]
    x = np.asarray(x, float)
    Y = np.atleast_2d(np.asarray(Y, float))
    full = np.zeros((len(Y), algebra.dim))
    full[:, d1:] = Y
    X = np.zeros_like(full)
    X[:, :d1] = x[:d1]
    return (multiply_batch(algebra, X, full) - X)[:, d1:]


def psi_jacobian(algebra: GradedLieAlgebra, x, y, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference Jacobian of ``psi_x`` on the commutator block at ``y``."""
    d1 = algebra.layer_dims[0]
    m = algebra.dim - d1
    y = np.asarray(y, float)
    if y.shape == (algebra.dim,):
        y = y[d1:]
    E = np.eye(m) * h
    pts = np.concatenate([y + E, y - E])
    vals = psi_batch(algebra, x, pts)
    return ((vals[:m] - vals[m:]) / (2 * h)).T
