from fractions import Fraction

import numpy as np
import pytest

from carnot.bch import bch_exact, bch_program, bch_word_coefficients
from carnot.errors import DimensionCap, UnsupportedStep
from carnot.group import multiply_batch
from carnot.hall import hall_basis, hall_structure_constants
from carnot.algebra import build_free_nilpotent
from carnot.oracles import free_nilpotent_cases, mobius, witt_dimension, witt_layers

from conftest import nilpotent_exp, nilpotent_log, to_matrix, upper_triangular_algebra


def necklace_count(rank, degree):
    """Witt dimension by brute force: aperiodic words up to rotation (Lyndon words)."""
    from itertools import product
    count = 0
    for w in product(range(rank), repeat=degree):
        rotations = [w[i:] + w[:i] for i in range(degree)]
        if all(w < r for r in rotations[1:]):
            count += 1
    return count


@pytest.mark.parametrize("n, mu", [(1, 1), (2, -1), (3, -1), (4, 0), (6, 1), (30, -1), (12, 0)])
def test_mobius(n, mu):
    assert mobius(n) == mu


@pytest.mark.parametrize("rank", [2, 3, 4])
@pytest.mark.parametrize("degree", [1, 2, 3, 4, 5])
def test_witt_matches_lyndon_count(rank, degree):
    assert witt_dimension(rank, degree) == necklace_count(rank, degree)


def test_free_cases_cover_cap():
    cases = free_nilpotent_cases(64)
    assert (2, 7) in cases and (3, 4) in cases and (64, 1) in cases
    assert (2, 8) not in cases and (3, 5) not in cases
    assert all(sum(witt_layers(r, s)) <= 64 for r, s in cases)


def test_hall_basis_rank2_step3():
    basis = hall_basis(2, 3)
    labels = [h.label(basis) for h in basis]
    assert labels[2:] == ["[x1,x2]", "[x1,[x1,x2]]", "[x2,[x1,x2]]"]


@pytest.mark.parametrize("rank, step, dim", [(2, 7, 41), (5, 3, 55), (10, 2, 55)])
def test_hall_basis_sizes(rank, step, dim):
    assert len(hall_basis(rank, step)) == dim


def test_hall_basis_cap():
    with pytest.raises(DimensionCap):
        hall_basis(2, 8, cap=64)


def test_hall_constants_integral():
    basis = hall_basis(3, 3)
    for _, _, _, c in hall_structure_constants(basis, 3):
        assert Fraction(c).denominator == 1


def test_bch_word_coefficients_degree2():
    coeffs = bch_word_coefficients(2)
    assert coeffs[(0, 1)] == Fraction(1, 2)
    assert coeffs[(1, 0)] == Fraction(-1, 2)


@pytest.mark.parametrize("degree, nodes", [(2, 1), (3, 3), (4, 5), (5, 15), (6, 29)])
def test_bch_program_sizes(degree, nodes):
    assert bch_program(degree).n_nodes == nodes


def test_bch_program_rejects_degree_7():
    with pytest.raises(UnsupportedStep):
        bch_program(7)


def test_free23_e1_e2(free23):
    expected = [1, 1, Fraction(1, 2), Fraction(1, 12), Fraction(-1, 12)]
    assert bch_exact(free23, [1, 0, 0, 0, 0], [0, 1, 0, 0, 0]) == expected


def _dynkin_degree4(alg, x, y):
    """x + y + [x,y]/2 + ([x,[x,y]] + [y,[y,x]])/12 - [y,[x,[x,y]]]/24 in rationals."""
    b = alg.bracket_exact
    xy = b(x, y)
    terms = [x, y, [c / 2 for c in xy], [c / 12 for c in b(x, xy)],
             [c / 12 for c in b(y, b(y, x))], [-c / 24 for c in b(y, b(x, xy))]]
    return [sum(col, Fraction(0)) for col in zip(*terms)]


@pytest.mark.parametrize("rank", [2, 3])
def test_bch_exact_matches_explicit_formula_step4(rank):
    alg = build_free_nilpotent(rank, 4)
    rng = np.random.default_rng(rank)
    for _ in range(5):
        x = [Fraction(int(v), 4) for v in rng.integers(-8, 9, alg.dim)]
        y = [Fraction(int(v), 4) for v in rng.integers(-8, 9, alg.dim)]
        assert bch_exact(alg, x, y) == _dynkin_degree4(alg, x, y)


@pytest.mark.parametrize("m", [3, 4, 5, 6, 7])
def test_bch_against_matrix_exponential(m):
    # strictly upper triangular m x m matrices: step m - 1, up to degree 6
    alg, pairs = upper_triangular_algebra(m)
    assert alg.step == m - 1
    rng = np.random.default_rng(m)
    X = rng.uniform(-1, 1, (50, alg.dim))
    Y = rng.uniform(-1, 1, (50, alg.dim))
    Z = multiply_batch(alg, X, Y)
    for x, y, z in zip(X, Y, Z):
        U = nilpotent_exp(to_matrix(x, pairs, m)) @ nilpotent_exp(to_matrix(y, pairs, m))
        np.testing.assert_allclose(to_matrix(z, pairs, m), nilpotent_log(U), atol=1e-12)
