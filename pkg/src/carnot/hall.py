"""Hall basis of the free nilpotent Lie algebra.

Convention: elements are ordered by degree, then by creation order.  A
bracket ``[a, b]`` of Hall elements is itself a Hall element when ``a < b``
and either ``b`` is a generator or ``b = [b', b'']`` with ``b' <= a``.  For
rank 2 this gives ``e1, e2, [e1,e2], [e1,[e1,e2]], [e2,[e1,e2]], ...``.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from fractions import Fraction

from .errors import DimensionCap


@dataclass(frozen=True)
class HallElement:
    index: int
    degree: int
    left: int | None = None
    right: int | None = None

    @property
    def is_generator(self) -> bool:
        return self.left is None

    def label(self, basis=None) -> str:
        return f"e{self.index + 1}" if basis is None else _label(basis, self.index)


def _label(basis, idx) -> str:
    h = basis[idx]
    if h.is_generator:
        return f"x{idx + 1}"
    return f"[{_label(basis, h.left)},{_label(basis, h.right)}]"


def hall_basis(rank: int, step: int, cap: int | None = None) -> list[HallElement]:
    basis = [HallElement(i, 1) for i in range(rank)]
    by_degree: dict[int, list[HallElement]] = {1: list(basis)}
    if cap is not None and len(basis) > cap:
        raise DimensionCap(f"free({rank},{step}) exceeds dimension cap {cap}")
    for d in range(2, step + 1):
        layer = []
        for da in range(1, d):
            for a in by_degree.get(da, ()):
                for b in by_degree.get(d - da, ()):
                    if a.index >= b.index:
                        continue
                    if not b.is_generator and b.left > a.index:
                        continue
                    h = HallElement(len(basis), d, a.index, b.index)
                    basis.append(h)
                    layer.append(h)
                    if cap is not None and len(basis) > cap:
                        raise DimensionCap(f"free({rank},{step}) exceeds dimension cap {cap}")
        by_degree[d] = layer
    return basis


class _Reducer:
    """Rewrites ``[a, b]`` of Hall elements into the Hall basis (collection)."""

    def __init__(self, basis: list[HallElement], step: int):
        self.basis = basis
        self.step = step
        self.lookup = {(h.left, h.right): h.index for h in basis if not h.is_generator}
        self.memo: dict[tuple[int, int], dict[int, Fraction]] = {}

    def bracket(self, a: int, b: int) -> dict[int, Fraction]:
        key = (a, b)
        if key in self.memo:
            return self.memo[key]
        out = self._bracket(a, b)
        self.memo[key] = out
        return out

    def _bracket(self, a: int, b: int) -> dict[int, Fraction]:
        if a == b:
            return {}
        if a > b:
            return {k: -c for k, c in self.bracket(b, a).items()}
        ha, hb = self.basis[a], self.basis[b]
        if ha.degree + hb.degree > self.step:
            return {}
        if hb.is_generator or hb.left <= a:
            return {self.lookup[(a, b)]: Fraction(1)}
        # [a, [b1, b2]] = [b1, [a, b2]] - [b2, [a, b1]]
        out: dict[int, Fraction] = {}
        for outer, inner, sign in ((hb.left, hb.right, 1), (hb.right, hb.left, -1)):
            for h, c in self.bracket(a, inner).items():
                for k, v in self.bracket(outer, h).items():
                    out[k] = out.get(k, Fraction(0)) + sign * c * v
        return {k: v for k, v in out.items() if v}


def hall_structure_constants(basis: list[HallElement], step: int) -> list[tuple]:
    """1-based ``(i, j, k, c)`` triples for all ``i < j`` brackets."""
    red = _Reducer(basis, step)
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10_000))
    try:
        triples = []
        n = len(basis)
        for i in range(n):
            for j in range(i + 1, n):
                if basis[i].degree + basis[j].degree > step:
                    continue
                for k, c in sorted(red.bracket(i, j).items()):
                    triples.append((i + 1, j + 1, k + 1, c))
        return triples
    finally:
        sys.setrecursionlimit(limit)
