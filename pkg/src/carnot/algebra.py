"""Graded nilpotent Lie algebras given by exact structure constants.

Basis indices are 0-based throughout the Python API.  The constructors that
mirror the JSON interchange format (``build_from_constants`` and
``GradedLieAlgebra.from_dict``) take 1-based indices, as the file format does.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionCap,
    DimensionMismatch,
    DuplicateTriple,
    GradingViolation,
    JacobiViolation,
    NotSkew,
    StructuralError,
)

DEFAULT_DIMENSION_CAP = 64
PIVOT_TOL = 1e-10

Sparse = dict[int, Fraction]


@dataclass(frozen=True)
class Grading:
    layer_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.layer_dims)
        if not dims:
            raise GradingViolation("a grading needs at least one layer")
        if any(d < 1 for d in dims):
            raise GradingViolation(f"all layers must be nonempty, got {list(dims)}")
        object.__setattr__(self, "layer_dims", dims)

    @property
    def step(self) -> int:
        return len(self.layer_dims)

    @property
    def total_dim(self) -> int:
        return sum(self.layer_dims)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out = [0]
        for d in self.layer_dims:
            out.append(out[-1] + d)
        return tuple(out)

    @cached_property
    def layers(self) -> tuple[int, ...]:
        """Layer number (1-based) of every basis index."""
        return tuple(k + 1 for k, d in enumerate(self.layer_dims) for _ in range(d))

    def layer_of(self, j: int) -> int:
        return self.layers[j]

    def layer_slice(self, k: int) -> slice:
        """Coordinate block of layer ``k`` (1-based)."""
        return slice(self.offsets[k - 1], self.offsets[k])

    @property
    def homogeneous_dimension(self) -> int:
        return sum(k * d for k, d in enumerate(self.layer_dims, start=1))


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        # floats enter only through user matrices; keep their exact binary value
        return Fraction(c)
    return Fraction(str(c)) if not isinstance(c, int) else Fraction(c)


@dataclass(frozen=True, eq=False)
class GradedLieAlgebra:
    """A graded nilpotent Lie algebra.

    ``constants[(i, j)]`` for ``i < j`` lists ``(k, c)`` with
    ``[e_i, e_j] = sum c e_k``.  Instances are immutable; the float views
    used by the numerical kernels are derived lazily and cached.
    """

    grading: Grading
    constants: Mapping[tuple[int, int], tuple[tuple[int, Fraction], ...]]
    name: str = ""
    labels: tuple[str, ...] = field(default=(), repr=False)

    @property
    def dim(self) -> int:
        return self.grading.total_dim

    @property
    def step(self) -> int:
        return self.grading.step

    @property
    def layer_dims(self) -> tuple[int, ...]:
        return self.grading.layer_dims

    def __repr__(self):
        label = f"{self.name!r}, " if self.name else ""
        return f"GradedLieAlgebra({label}layers={list(self.layer_dims)})"

    # -- exact arithmetic ----------------------------------------------------

    def basis_bracket(self, i: int, j: int) -> Sparse:
        if i == j:
            return {}
        if i < j:
            return {k: c for k, c in self.constants.get((i, j), ())}
        return {k: -c for k, c in self.constants.get((j, i), ())}

    def bracket_sparse(self, x: Mapping[int, Fraction], y: Mapping[int, Fraction]) -> Sparse:
        out: Sparse = {}
        for i, a in x.items():
            if not a:
                continue
            for j, b in y.items():
                if not b or i == j:
                    continue
                for k, c in self.basis_bracket(i, j).items():
                    out[k] = out.get(k, Fraction(0)) + a * b * c
        return {k: v for k, v in out.items() if v}

    def bracket_exact(self, x: Sequence, y: Sequence) -> list[Fraction]:
        """Bracket of two coordinate vectors in exact rational arithmetic."""
        self._check_len(x)
        self._check_len(y)
        xs = {i: _as_fraction(v) for i, v in enumerate(x) if v}
        ys = {i: _as_fraction(v) for i, v in enumerate(y) if v}
        out = [Fraction(0)] * self.dim
        for k, v in self.bracket_sparse(xs, ys).items():
            out[k] = v
        return out

    def jacobi_residual(self, i: int, j: int, k: int) -> Sparse:
        ei, ej, ek = ({i: Fraction(1)}, {j: Fraction(1)}, {k: Fraction(1)})
        total: Sparse = {}
        for a, b, c in ((ei, ej, ek), (ej, ek, ei), (ek, ei, ej)):
            for idx, v in self.bracket_sparse(a, self.bracket_sparse(b, c)).items():
                total[idx] = total.get(idx, Fraction(0)) + v
        return {idx: v for idx, v in total.items() if v}

    def validate(self) -> None:
        """Check grading compatibility and the Jacobi identity exactly."""
        layers = self.grading.layers
        n, s = self.dim, self.step
        for (i, j), terms in self.constants.items():
            if not (0 <= i < j < n):
                raise StructuralError(f"bad stored pair {(i, j)}")
            for k, c in terms:
                if not 0 <= k < n:
                    raise StructuralError(f"target index {k + 1} out of range")
                if layers[k] != layers[i] + layers[j]:
                    raise GradingViolation(
                        f"[e{i + 1}, e{j + 1}] has a term in e{k + 1} (layer {layers[k]}), "
                        f"expected layer {layers[i] + layers[j]}"
                    )
        for i, j, k in combinations(range(n), 3):
            if layers[i] + layers[j] + layers[k] > s:
                continue
            res = self.jacobi_residual(i, j, k)
            if res:
                raise JacobiViolation((i + 1, j + 1, k + 1), res)

    def nested_bracket_exact(self, vectors: Sequence[Sequence]) -> list[Fraction]:
        """Left-normed bracket ``[...[[x1, x2], x3], ..., xm]``."""
        acc = [_as_fraction(v) for v in vectors[0]]
        for v in vectors[1:]:
            acc = self.bracket_exact(acc, v)
        return acc

    # -- float views ---------------------------------------------------------

    @cached_property
    def sparse_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """``(I, J, K, C)`` with ``[e_I, e_J] += C e_K`` for every stored term."""
        rows = [(i, j, k, float(c)) for (i, j), terms in sorted(self.constants.items())
                for k, c in terms]
        if not rows:
            return (np.zeros(0, np.int64), np.zeros(0, np.int64),
                    np.zeros(0, np.int64), np.zeros(0, np.float64))
        I, J, K, C = zip(*rows)
        return (np.asarray(I, np.int64), np.asarray(J, np.int64),
                np.asarray(K, np.int64), np.asarray(C, np.float64))

    @cached_property
    def scatter_matrix(self) -> np.ndarray:
        _, _, K, C = self.sparse_arrays
        S = np.zeros((len(K), self.dim))
        S[np.arange(len(K)), K] = C
        return S

    def bracket(self, x, y) -> np.ndarray:
        """Bracket of float coordinate arrays; leading axes broadcast."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape[-1] != self.dim or y.shape[-1] != self.dim:
            raise DimensionMismatch(
                f"expected vectors of length {self.dim}, got {x.shape[-1]} and {y.shape[-1]}")
        I, J, _, _ = self.sparse_arrays
        prod = x[..., I] * y[..., J] - x[..., J] * y[..., I]
        return prod @ self.scatter_matrix

    def structure_tensor(self) -> np.ndarray:
        """Dense ``c[i, j, k]`` as floats (both orders filled)."""
        n = self.dim
        T = np.zeros((n, n, n))
        for (i, j), terms in self.constants.items():
            for k, c in terms:
                T[i, j, k] = float(c)
                T[j, i, k] = -float(c)
        return T

    def ad_matrix(self, x) -> np.ndarray:
        """Matrix of ``y -> [x, y]``."""
        return np.einsum("i,ijk->kj", np.asarray(x, float), self.structure_tensor())

    @property
    def is_abelian(self) -> bool:
        return not any(self.constants.values())

    # -- program for the group law --------------------------------------------

    @cached_property
    def bch(self):
        from .bch import compile_bch
        return compile_bch(self)

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        brackets = []
        for (i, j) in sorted(self.constants):
            terms = [{"k": k + 1, "c": str(c)} for k, c in self.constants[(i, j)]]
            if terms:
                brackets.append({"i": i + 1, "j": j + 1, "terms": terms})
        return {"layers": list(self.layer_dims), "brackets": brackets}

    @classmethod
    def from_dict(cls, data: Mapping, *, dimension_cap: int = DEFAULT_DIMENSION_CAP,
                  name: str = "") -> GradedLieAlgebra:
        triples = []
        for entry in data.get("brackets", []):
            for term in entry["terms"]:
                triples.append((entry["i"], entry["j"], term["k"], Fraction(str(term["c"]))))
        return build_from_constants(data["layers"], triples, dimension_cap=dimension_cap,
                                    name=name)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str, **kw) -> GradedLieAlgebra:
        return cls.from_dict(json.loads(text), **kw)

    def same_structure(self, other: GradedLieAlgebra) -> bool:
        return (self.layer_dims == other.layer_dims
                and {k: tuple(v) for k, v in self.constants.items() if v}
                == {k: tuple(v) for k, v in other.constants.items() if v})

    def _check_len(self, x):
        if len(x) != self.dim:
            raise DimensionMismatch(f"expected length {self.dim}, got {len(x)}")


def build_from_constants(grading, triples: Iterable, *, dimension_cap: int = DEFAULT_DIMENSION_CAP,
                         name: str = "", validate: bool = True) -> GradedLieAlgebra:
    """Build and validate an algebra from 1-based ``(i, j, k, c)`` triples.

    ``(j, i, k, c)`` with ``j > i`` is stored as ``(i, j, k, -c)``.  Zero
    coefficients are dropped.
    """
    if not isinstance(grading, Grading):
        grading = Grading(tuple(grading))
    n = grading.total_dim
    if n > dimension_cap:
        raise DimensionCap(f"total dimension {n} exceeds cap {dimension_cap}")
    table: dict[tuple[int, int], dict[int, Fraction]] = {}
    for i, j, k, c in triples:
        i, j, k = int(i) - 1, int(j) - 1, int(k) - 1
        if not (0 <= i < n and 0 <= j < n and 0 <= k < n):
            raise StructuralError(f"index out of range in triple {(i + 1, j + 1, k + 1)}")
        if i == j:
            raise StructuralError(f"self-bracket specified for e{i + 1}")
        c = _as_fraction(c)
        if i > j:
            i, j, c = j, i, -c
        row = table.setdefault((i, j), {})
        if k in row:
            raise DuplicateTriple(f"[e{i + 1}, e{j + 1}] coefficient of e{k + 1} given twice")
        row[k] = c
    constants = {
        key: tuple((k, c) for k, c in sorted(row.items()) if c)
        for key, row in sorted(table.items())
    }
    constants = {key: terms for key, terms in constants.items() if terms}
    alg = GradedLieAlgebra(grading, constants, name=name)
    if validate:
        alg.validate()
    return alg


def abelian(dim: int) -> GradedLieAlgebra:
    return build_from_constants([dim], [], name=f"abelian({dim})")


def build_heisenberg_like(dim_W: int, dim_C: int, omega, *, name: str = "") -> GradedLieAlgebra:
    """Step-2 algebra ``W x C`` with ``[(w, c), (w', c')] = (0, omega(w, w'))``.

    ``omega`` is a sequence of ``dim_C`` skew matrices of size ``dim_W``;
    a single matrix is accepted when ``dim_C == 1``.
    """
    mats = [[[_as_fraction(v) for v in row] for row in m] for m in _as_matrix_list(omega, dim_C)]
    if len(mats) != dim_C:
        raise DimensionMismatch(f"need {dim_C} omega components, got {len(mats)}")
    triples = []
    for m, A in enumerate(mats):
        if len(A) != dim_W or any(len(row) != dim_W for row in A):
            raise DimensionMismatch(f"omega[{m}] must be {dim_W}x{dim_W}")
        for i in range(dim_W):
            for j in range(dim_W):
                if A[i][j] != -A[j][i]:
                    raise NotSkew(f"omega[{m}] is not skew-symmetric at ({i + 1}, {j + 1})")
        for i in range(dim_W):
            for j in range(i + 1, dim_W):
                if A[i][j]:
                    triples.append((i + 1, j + 1, dim_W + m + 1, A[i][j]))
    return build_from_constants([dim_W, dim_C], triples,
                                name=name or f"heisenberg_like({dim_W},{dim_C})")


def _as_matrix_list(omega, dim_C):
    arr = omega.tolist() if isinstance(omega, np.ndarray) else omega
    if dim_C == 1 and arr and not isinstance(arr[0][0], (list, tuple)):
        return [arr]
    return list(arr)


def heisenberg(n: int = 1) -> GradedLieAlgebra:
    """The ``(2n+1)``-dimensional Heisenberg algebra, ``[e_i, e_{n+i}] = e_{2n+1}``."""
    J = [[0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        J[i][n + i] = 1
        J[n + i][i] = -1
    return build_heisenberg_like(2 * n, 1, [J], name=f"H{n}")


def build_l2_triple_truncation(k: int, *, dimension_cap: int = DEFAULT_DIMENSION_CAP
                               ) -> GradedLieAlgebra:
    """Coordinate truncation of the l2 x l2 x l2 example.

    Basis ``x_1..x_k, y_1..y_k`` in layer 1 and ``z_1..z_k`` in layer 2 with
    ``[x_i, y_i] = z_i``; a k-fold product of first Heisenberg algebras.
    """
    if k < 1:
        raise StructuralError("k must be >= 1")
    triples = [(i + 1, k + i + 1, 2 * k + i + 1, 1) for i in range(k)]
    return build_from_constants([2 * k, k], triples, dimension_cap=dimension_cap,
                                name=f"l2triple({k})")


def build_free_nilpotent(rank: int, step: int, *, dimension_cap: int = DEFAULT_DIMENSION_CAP
                         ) -> GradedLieAlgebra:
    """Free nilpotent Lie algebra on a Hall basis.

    Trailing empty layers (rank 1) are dropped, so ``free(1, s)`` is the
    1-dimensional abelian algebra.
    """
    from .hall import hall_basis, hall_structure_constants

    if rank < 1 or step < 1:
        raise StructuralError("rank and step must be >= 1")
    basis = hall_basis(rank, step, cap=dimension_cap)
    dims = [0] * step
    for h in basis:
        dims[h.degree - 1] += 1
    while dims and dims[-1] == 0:
        dims.pop()
    triples = hall_structure_constants(basis, step)
    alg = build_from_constants(dims, triples, dimension_cap=dimension_cap,
                               name=f"free({rank},{step})")
    return replace(alg, labels=tuple(h.label(basis) for h in basis))


# -- subalgebras ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SubalgebraBasis:
    """Orthonormal basis of a subalgebra.

    ``layers[m]`` is the layer of ``vectors[m]`` or ``None`` when that vector
    is not homogeneous.
    """

    parent: GradedLieAlgebra
    vectors: np.ndarray
    layers: tuple

    @property
    def dim(self) -> int:
        return len(self.vectors)

    @property
    def is_graded(self) -> bool:
        return all(layer is not None for layer in self.layers)

    def layer_dims(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for layer in self.layers:
            out[layer] = out.get(layer, 0) + 1
        return out

    def projector(self) -> np.ndarray:
        return self.vectors.T @ self.vectors

    def contains(self, v, tol: float = 1e-9) -> bool:
        v = np.asarray(v, float)
        if self.dim == 0:
            return bool(np.linalg.norm(v) <= tol)
        resid = v - self.projector() @ v
        return bool(np.linalg.norm(resid) <= tol * max(1.0, np.linalg.norm(v)))

    def spans_subspace_of(self, other: SubalgebraBasis, tol: float = 1e-9) -> bool:
        return all(other.contains(v, tol) for v in self.vectors)

    def same_span(self, other: SubalgebraBasis, tol: float = 1e-9) -> bool:
        return self.dim == other.dim and self.spans_subspace_of(other, tol)

    def coords(self, c) -> np.ndarray:
        """Ambient coordinates of ``sum c_m v_m``; leading axes broadcast."""
        return np.asarray(c, float) @ self.vectors

    def is_ideal(self, tol: float = 1e-9) -> bool:
        P = self.projector()
        eye = np.eye(self.parent.dim)
        for v in self.vectors:
            br = self.parent.bracket(eye, v)
            if np.any(np.linalg.norm(br - br @ P, axis=1) > tol):
                return False
        return True

    def to_dict(self) -> dict:
        return {"vectors": self.vectors.tolist()}


def _vector_layer(grading: Grading, v: np.ndarray, tol: float):
    scale = np.max(np.abs(v))
    present = [k for k in range(1, grading.step + 1)
               if np.max(np.abs(v[grading.layer_slice(k)]), initial=0.0) > tol * scale]
    return present[0] if len(present) == 1 else None


def subalgebra_closure(algebra: GradedLieAlgebra, generators) -> SubalgebraBasis:
    """Smallest bracket-closed subspace containing ``generators``.

    Iterated bracketing with modified Gram-Schmidt; a candidate is kept when
    its residual exceeds ``PIVOT_TOL`` relative to its norm.
    """
    gens = [np.asarray(g, float) for g in generators]
    if not gens:
        raise StructuralError("subalgebra_closure needs at least one generator")
    for g in gens:
        if g.shape != (algebra.dim,):
            raise DimensionMismatch(f"generator of shape {g.shape}, expected ({algebra.dim},)")
    basis: list[np.ndarray] = []

    def absorb(v) -> np.ndarray | None:
        norm0 = np.linalg.norm(v)
        if norm0 == 0:
            return None
        r = v.copy()
        for _ in range(2):
            for b in basis:
                r -= (b @ r) * b
        if np.linalg.norm(r) <= PIVOT_TOL * norm0:
            return None
        r /= np.linalg.norm(r)
        basis.append(r)
        return r

    frontier = [b for b in (absorb(g) for g in gens) if b is not None]
    while frontier:
        new = []
        snapshot = list(basis)
        for f in frontier:
            for b in snapshot:
                nb = absorb(algebra.bracket(f, b))
                if nb is not None:
                    new.append(nb)
        frontier = new
    vectors = np.array(basis) if basis else np.zeros((0, algebra.dim))
    # brackets of homogeneous vectors have exact zeros off their layer, so
    # Gram-Schmidt keeps homogeneous inputs homogeneous
    layers = [_vector_layer(algebra.grading, v, 0.0) for v in vectors]
    if all(layer is not None for layer in layers):
        order = np.argsort(layers, kind="stable")
        vectors = vectors[order]
        layers = [layers[i] for i in order]
    return SubalgebraBasis(algebra, vectors, tuple(layers))


def coordinate_subalgebra(algebra: GradedLieAlgebra, indices: Iterable[int]) -> SubalgebraBasis:
    """Span of selected basis vectors (0-based), which must be bracket-closed."""
    idx = sorted(set(int(i) for i in indices))
    vecs = np.eye(algebra.dim)[idx]
    sub = SubalgebraBasis(algebra, vecs, tuple(algebra.grading.layer_of(i) for i in idx))
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            if not sub.contains(algebra.bracket(vecs[a], vecs[b])):
                raise StructuralError(f"basis span {idx} is not a subalgebra")
    return sub


def full_subalgebra(algebra: GradedLieAlgebra) -> SubalgebraBasis:
    return coordinate_subalgebra(algebra, range(algebra.dim))


def commutator_ideal(algebra: GradedLieAlgebra) -> SubalgebraBasis:
    """Coordinates of layers 2..s, the commutator block of a stratified algebra."""
    return coordinate_subalgebra(algebra, range(algebra.layer_dims[0], algebra.dim))
