from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from carnot.algebra import heisenberg
from carnot.errors import AlgebraMismatch, DimensionMismatch, DomainViolation
from carnot.group import (
    GroupElement,
    abelianization_project,
    dilate,
    dilate_batch,
    group_commutator,
    inverse,
    multiply,
    multiply_batch,
    multiply_exact,
    psi,
    psi_batch,
    psi_jacobian,
)
from carnot.presets import ACCEPTANCE_ALGEBRAS, STEP2_ALGEBRAS, preset_algebra

coords3 = arrays(np.float64, 3, elements=st.floats(-5, 5))
lams = st.floats(-3, 3).filter(lambda v: abs(v) > 1e-3)


def el(alg, *c):
    return GroupElement(alg, c)


def test_h1_product(h1):
    assert multiply(el(h1, 1, 0, 0), el(h1, 0, 1, 0)) == el(h1, 1, 1, 0.5)


def test_h1_inverse(h1):
    assert inverse(el(h1, 1, 2, 3)) == el(h1, -1, -2, -3)
    assert multiply(el(h1, 1, 0, 0), inverse(el(h1, 1, 0, 0))) == GroupElement.identity(h1)


def test_operators(h1):
    g = el(h1, 1, 2, 3)
    assert g * ~g == GroupElement.identity(h1)
    np.testing.assert_array_equal(g.layer(2), [3])


def test_element_validation(h1):
    with pytest.raises(DimensionMismatch):
        GroupElement(h1, [1, 2])
    with pytest.raises(DomainViolation):
        GroupElement(h1, [np.nan, 0, 0])
    g = el(h1, 1, 2, 3)
    with pytest.raises(ValueError):
        g.coords[0] = 5


def test_algebra_mismatch(h1, free23):
    with pytest.raises(AlgebraMismatch):
        multiply(el(h1, 1, 0, 0), GroupElement(free23, np.zeros(5)))


def test_free23_exact_inverse(free23):
    rng = np.random.default_rng(0)
    for _ in range(20):
        g = [Fraction(int(v), 7) for v in rng.integers(-20, 21, 5)]
        assert multiply_exact(free23, g, [-c for c in g]) == [0] * 5
    X = rng.uniform(-1, 1, (100, 5))
    assert np.max(np.abs(multiply_batch(free23, X, -X))) <= 1e-12


@pytest.mark.parametrize("name", ACCEPTANCE_ALGEBRAS)
def test_self_inverse_all_presets(name):
    alg = preset_algebra(name)
    X = np.random.default_rng(1).uniform(-1, 1, (50, alg.dim))
    assert np.max(np.abs(multiply_batch(alg, X, -X))) <= 1e-12


@pytest.mark.parametrize("name", ["h1", "free-2-3", "free-3-3", "free-2-5", "free-2-6",
                                  "l2triple-3", "heisenberg-like-4-1"])
def test_associativity(name):
    alg = preset_algebra(name)
    X, Y, Z = np.random.default_rng(2).uniform(-1, 1, (3, 1000, alg.dim))
    a = multiply_batch(alg, multiply_batch(alg, X, Y), Z)
    b = multiply_batch(alg, X, multiply_batch(alg, Y, Z))
    assert np.max(np.abs(a - b) / np.maximum(1, np.abs(a))) <= 1e-9


@pytest.mark.parametrize("name", STEP2_ALGEBRAS)
def test_step2_closed_form(name):
    alg = preset_algebra(name)
    X, Y = np.random.default_rng(3).uniform(-1, 1, (2, 500, alg.dim))
    d1 = alg.layer_dims[0]
    expect = X + Y
    expect[:, d1:] += 0.5 * alg.bracket(X, Y)[:, d1:]
    np.testing.assert_allclose(multiply_batch(alg, X, Y), expect, rtol=0, atol=1e-14)


def test_multiply_batch_broadcasts(free23):
    X = np.random.default_rng(4).uniform(-1, 1, (6, 5))
    g = X[2]
    np.testing.assert_allclose(multiply_batch(free23, g, X), multiply_batch(free23, np.tile(g, (6, 1)), X))


def test_dilate_examples(h1):
    assert dilate(2, el(h1, 1, 1, 1)) == el(h1, 2, 2, 4)
    g = el(h1, 0.3, -1, 2)
    assert dilate(1, g) == g
    assert dilate(0, g) == GroupElement.identity(h1)
    assert dilate(-1, g) == el(h1, -0.3, 1, 2)


@given(coords3, lams, lams)
def test_dilation_composition(x, lam, mu):
    alg = heisenberg(1)
    np.testing.assert_allclose(dilate_batch(alg, lam * mu, x),
                               dilate_batch(alg, lam, dilate_batch(alg, mu, x)),
                               rtol=1e-12, atol=1e-12)


@given(coords3, coords3, lams)
def test_dilation_automorphism(x, y, lam):
    alg = heisenberg(1)
    lhs = dilate_batch(alg, lam, multiply_batch(alg, x, y))
    rhs = multiply_batch(alg, dilate_batch(alg, lam, x), dilate_batch(alg, lam, y))
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10)


def test_group_commutator(h1):
    e1, e2 = el(h1, 1, 0, 0), el(h1, 0, 1, 0)
    assert group_commutator(e1, e2) == el(h1, 0, 0, 1)
    x = el(h1, 0.2, 0.7, -1)
    assert group_commutator(x, x) == GroupElement.identity(h1)
    assert group_commutator(x, GroupElement.identity(h1)) == GroupElement.identity(h1)


@given(coords3, coords3, lams)
def test_projection_homomorphism(x, y, lam):
    alg = heisenberg(1)
    gx, gy = GroupElement(alg, x), GroupElement(alg, y)
    np.testing.assert_allclose(abelianization_project(gx * gy),
                               abelianization_project(gx) + abelianization_project(gy),
                               atol=1e-12)
    np.testing.assert_allclose(abelianization_project(dilate(lam, gx)), lam * x[:2],
                               rtol=1e-12, atol=1e-12)


def test_projection_example(h1):
    np.testing.assert_array_equal(abelianization_project(el(h1, 1, 2, 3)), [1, 2])


class TestPsi:
    def test_center_is_fixed(self, h1):
        assert psi(el(h1, 1, 0, 0), el(h1, 0, 0, 5)) == el(h1, 0, 0, 5)

    def test_zero_x(self, free23):
        y = GroupElement(free23, [0, 0, 1.5, -2, 0.25])
        assert psi(GroupElement.identity(free23), y) == y

    def test_domain(self, h1):
        with pytest.raises(DomainViolation):
            psi(el(h1, 1, 0, 1), el(h1, 0, 0, 1))
        with pytest.raises(DomainViolation):
            psi(el(h1, 1, 0, 0), el(h1, 1, 0, 1))

    def test_free23_triangular(self, free23):
        # psi_{e1}(t e3) = t e3 + t e4 / 2: unit lower-triangular, determinant 1
        x = np.array([1.0, 0, 0, 0, 0])
        J = psi_jacobian(free23, x, np.array([0.3, 0, 0]))
        np.testing.assert_allclose(J, [[1, 0, 0], [0.5, 1, 0], [0, 0, 1]], atol=1e-9)
        np.testing.assert_allclose(psi_batch(free23, x, [[2.0, 0, 0]]), [[2.0, 1.0, 0]],
                                   atol=1e-15)

    @pytest.mark.parametrize("name", ACCEPTANCE_ALGEBRAS + ("free-2-5", "free-3-3"))
    def test_unit_determinant(self, name):
        alg = preset_algebra(name)
        d1 = alg.layer_dims[0]
        rng = np.random.default_rng(5)
        for _ in range(20):
            x = np.zeros(alg.dim)
            x[:d1] = rng.uniform(-1, 1, d1)
            y = rng.uniform(-1, 1, alg.dim - d1)
            assert abs(np.linalg.det(psi_jacobian(alg, x, y)) - 1) <= 1e-8
