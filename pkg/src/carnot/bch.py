"""Compile the Baker-Campbell-Hausdorff-Dynkin product into a bracket program.

``log(exp X exp Y)`` is expanded in the truncated free associative algebra
on two letters with exact rationals.  Its degree-n part is a Lie polynomial
``sum_w c_w w``, and by the Dynkin-Specht-Wever lemma it equals
``(1/n) sum_w c_w [w1, [w2, [..., [w_{n-1}, w_n]]]]``.  Right-normed brackets
that share a suffix share work, so the program is a list of nodes
``node_t = [leaf_t, node_{operand_t}]`` with leaves ``0 = X`` and ``1 = Y``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from .errors import UnsupportedStep

MAX_DEGREE = 6

Word = tuple[int, ...]
Poly = dict[Word, Fraction]


def _mul(a: Poly, b: Poly, degree: int) -> Poly:
    out: Poly = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            if len(wa) + len(wb) > degree:
                continue
            w = wa + wb
            out[w] = out.get(w, Fraction(0)) + ca * cb
    return {w: c for w, c in out.items() if c}


def _exp_letter(letter: int, degree: int) -> Poly:
    return {(letter,) * k: Fraction(1, factorial(k)) for k in range(degree + 1)}


@lru_cache(maxsize=None)
def bch_word_coefficients(degree: int) -> dict[Word, Fraction]:
    """Coefficients of ``log(exp X exp Y)`` on words of length ``2..degree``."""
    P = _mul(_exp_letter(0, degree), _exp_letter(1, degree), degree)
    P.pop((), None)  # P - 1
    log: Poly = {}
    power: Poly = {(): Fraction(1)}
    for m in range(1, degree + 1):
        power = _mul(power, P, degree)
        sign = Fraction((-1) ** (m + 1), m)
        for w, c in power.items():
            log[w] = log.get(w, Fraction(0)) + sign * c
    return {w: c for w, c in sorted(log.items(), key=lambda t: (len(t[0]), t[0]))
            if c and len(w) >= 2}


@dataclass(frozen=True)
class BCHProgram:
    degree: int
    leaf: np.ndarray        # int64, 0 = X, 1 = Y
    operand: np.ndarray     # int64, index into the value list (0, 1 are X, Y)
    coef: np.ndarray        # float64 weight of each node in the product
    coef_exact: tuple[Fraction, ...]

    @property
    def n_nodes(self) -> int:
        return len(self.leaf)


@lru_cache(maxsize=None)
def bch_program(degree: int) -> BCHProgram:
    if degree > MAX_DEGREE:
        raise UnsupportedStep(f"BCH products supported up to step {MAX_DEGREE}, got {degree}")
    coeffs = bch_word_coefficients(degree)
    node_of: dict[Word, int] = {(0,): 0, (1,): 1}
    leaf, operand, weight = [], [], []

    def node(w: Word) -> int:
        if w in node_of:
            return node_of[w]
        inner = node(w[1:])
        idx = len(leaf) + 2
        leaf.append(w[0])
        operand.append(inner)
        weight.append(Fraction(0))
        node_of[w] = idx
        return idx

    for w, c in coeffs.items():
        if w[-1] == w[-2]:
            continue  # innermost bracket [a, a] vanishes
        if w[-2] > w[-1]:
            w, c = w[:-2] + (w[-1], w[-2]), -c
        idx = node(w)
        weight[idx - 2] += c / len(w)
    return BCHProgram(
        degree=degree,
        leaf=np.asarray(leaf, np.int64),
        operand=np.asarray(operand, np.int64),
        coef=np.asarray([float(c) for c in weight], np.float64),
        coef_exact=tuple(weight),
    )


def compile_bch(algebra) -> BCHProgram:
    return bch_program(algebra.step)


def bch_exact(algebra, x, y) -> list[Fraction]:
    """Group product in exact rational arithmetic."""
    prog = algebra.bch
    xs = [Fraction(v) for v in x]
    ys = [Fraction(v) for v in y]
    values = [xs, ys]
    out = [a + b for a, b in zip(xs, ys)]
    for t in range(prog.n_nodes):
        v = algebra.bracket_exact(values[prog.leaf[t]], values[prog.operand[t]])
        values.append(v)
        c = prog.coef_exact[t]
        if c:
            out = [o + c * vi for o, vi in zip(out, v)]
    return out
