import numpy as np
import pytest

from carnot.algebra import (
    coordinate_subalgebra,
    full_subalgebra,
    heisenberg,
)
from carnot.errors import (
    FiltrationNotNested,
    InvalidDensityBound,
    StructuralError,
    SupportMismatch,
)
from carnot.group import GroupElement, multiply_batch
from carnot.measures import (
    Convolution,
    DensityOnSubgroup,
    GaussianLayer1,
    HaarBall,
    NamedDensity,
    PointMass,
    cac_partial_products,
    cac_truncated,
    cauchy_diagnostics,
    choose_epsilons,
    density_point_check,
    dilate_measure,
    estimate_mass,
    measure_from_dict,
    sample,
    sample_many,
    aronszajn_line_probe,
)
from carnot.metrics import HomogeneousGauge
from carnot.presets import filtration_preset
from carnot.rng import SamplerStream
from carnot.sets import (
    Everything,
    GaugeBall,
    HalfSpace,
    Nothing,
    PointComplement,
    Slab,
    set_from_dict,
)
from carnot.stats import mean_and_se, two_sample_ks, wilson_interval

H1 = heisenberg(1)
UNIT = HomogeneousGauge.unit(H1)
FULL = full_subalgebra(H1)
BALL = HaarBall(FULL, 1.0, UNIT)


class TestSampling:
    def test_point_mass(self):
        g = GroupElement(H1, [1, 2, 3])
        X = sample_many(PointMass(g), SamplerStream(0), 10)
        assert np.all(X == g.coords)

    def test_haar_ball_symmetric_mean(self):
        X = sample_many(BALL, SamplerStream(1), 100_000)
        for j in range(3):
            m, se = mean_and_se(X[:, j])
            assert abs(m) <= 3 * se

    def test_haar_ball_support(self):
        X = sample_many(BALL, SamplerStream(2), 10_000)
        assert np.all(UNIT(X) <= 1 + 1e-12)

    def test_haar_ball_uniform_against_box_rejection(self):
        # independent oracle: box proposals kept when N <= 1
        rng = np.random.default_rng(3)
        box = rng.uniform(-1, 1, (400_000, 3))
        ref = box[UNIT(box) <= 1][:50_000]
        X = sample_many(BALL, SamplerStream(3), 50_000)
        for f in (lambda A: A[:, 0], lambda A: A[:, 2], UNIT):
            assert two_sample_ks(f(X), f(ref), 0.001).passed

    def test_subgroup_samples_stay_in_subgroup(self):
        line = coordinate_subalgebra(H1, [0])
        X = sample_many(HaarBall(line, 2.0, UNIT), SamplerStream(4), 2000)
        assert np.all(X[:, 1:] == 0)

    def test_point_mass_convolution(self):
        a = GroupElement(H1, [1, 0, 0])
        b = GroupElement(H1, [0, 1, 0])
        X = sample_many(Convolution((PointMass(a), PointMass(b))), SamplerStream(5), 3)
        np.testing.assert_array_equal(X, [[1, 1, 0.5]] * 3)

    def test_random_access(self):
        s = SamplerStream(6)
        X = sample_many(BALL, s, 3000)
        for i in (0, 1023, 1024, 2999):
            np.testing.assert_array_equal(sample(BALL, s, i).coords, X[i])
        np.testing.assert_array_equal(sample_many(BALL, s, 100, start=1500), X[1500:1600])

    def test_thread_invariance(self):
        s = SamplerStream(7)
        conv = Convolution((BALL, dilate_measure(BALL, 0.5)))
        np.testing.assert_array_equal(sample_many(conv, s, 5000, threads=1),
                                      sample_many(conv, s, 5000, threads=4))

    def test_dilate_by_one_is_identity(self):
        s = SamplerStream(8)
        np.testing.assert_array_equal(sample_many(dilate_measure(BALL, 1.0), s, 2000),
                                      sample_many(BALL, s, 2000))

    def test_dilated_support(self):
        X = sample_many(dilate_measure(BALL, 0.01), SamplerStream(9), 100_000)
        assert np.all(UNIT(X) <= 0.01 + 1e-9)

    def test_dilate_zero_rejected(self):
        with pytest.raises(StructuralError):
            dilate_measure(BALL, 0)

    def test_gaussian_layer1(self):
        spec = GaussianLayer1(H1, np.diag([1.0, 4.0]))
        X = sample_many(spec, SamplerStream(10), 50_000)
        assert np.all(X[:, 2] == 0)
        assert np.var(X[:, 1]) == pytest.approx(4, rel=0.03)

    def test_density_rejection(self):
        spec = DensityOnSubgroup(FULL, NamedDensity("gauge_cone"), 1.0, 1.0, UNIT)
        X = sample_many(spec, SamplerStream(11), 20_000)
        assert np.all(UNIT(X) <= 1)
        # cone density pushes mass to the centre compared with the uniform ball
        assert np.median(UNIT(X)) < np.median(UNIT(sample_many(BALL, SamplerStream(12), 20_000)))

    def test_density_bound_violation(self):
        spec = DensityOnSubgroup(FULL, lambda X: 2 * np.ones(len(X)), 1.0, 1.0, UNIT)
        with pytest.raises(InvalidDensityBound):
            sample_many(spec, SamplerStream(0), 10)
        with pytest.raises(InvalidDensityBound):
            DensityOnSubgroup(FULL, NamedDensity("uniform"), 1.0, 0.0, UNIT)

    @pytest.mark.parametrize("data", [
        {"type": "HaarBall", "subgroup": "full", "radius": 2.0},
        {"type": "HaarBall", "subgroup": {"coordinates": [1, 3]}, "radius": 1.0},
        {"type": "PointMass", "element": [1, 2, 3]},
        {"type": "GaussianLayer1", "covariance": [[1, 0], [0, 1]]},
        {"type": "Dilated", "base": {"type": "HaarBall", "radius": 1}, "epsilon": 0.5},
        {"type": "Convolution", "factors": [{"type": "PointMass", "element": [0, 0, 1]},
                                            {"type": "HaarBall", "radius": 1}]},
        {"type": "DensityOnSubgroup", "density": {"kind": "gaussian", "scale": 0.5},
         "radius": 1.0, "bound": 1.0},
        {"type": "HeatKernel", "T": 0.5, "steps": 20},
    ])
    def test_dict_roundtrip(self, data):
        spec = measure_from_dict(data, H1, UNIT)
        again = measure_from_dict(spec.to_dict(), H1, UNIT)
        s = SamplerStream(13)
        np.testing.assert_allclose(sample_many(spec, s, 50), sample_many(again, s, 50),
                                   atol=1e-14)


class TestMass:
    def test_ball_quarter_volume(self):
        est = estimate_mass(BALL, GaugeBall(0.5, UNIT), 200_000, SamplerStream(20))
        assert est.ci_low <= 0.0625 <= est.ci_high

    def test_constant_indicators(self):
        one = estimate_mass(BALL, Everything(), 1000, SamplerStream(0))
        assert (one.estimate, one.ci_low, one.ci_high) == (1, 1, 1)
        zero = estimate_mass(BALL, Nothing(), 1000, SamplerStream(0))
        assert (zero.estimate, zero.ci_low, zero.ci_high) == (0, 0, 0)

    def test_hyperplane_is_null(self):
        assert estimate_mass(BALL, Slab(0), 10_000, SamplerStream(21)).estimate == 0

    def test_threads_identical(self):
        a = estimate_mass(BALL, HalfSpace(0), 20_000, SamplerStream(22), threads=1)
        b = estimate_mass(BALL, HalfSpace(0), 20_000, SamplerStream(22), threads=3)
        assert a == b

    def test_needs_samples(self):
        with pytest.raises(StructuralError):
            estimate_mass(BALL, HalfSpace(0), 10, SamplerStream(0))


class TestDensityPoint:
    def test_containment(self):
        rows = density_point_check(GaugeBall(1.0, UNIT), FULL, [0.1], 1000, SamplerStream(0),
                                   UNIT)
        assert rows[0][1] == 1.0

    def test_half_space(self):
        for _, est, (lo, hi) in density_point_check(HalfSpace(0), FULL, [1.0, 0.1, 0.01],
                                                    20_000, SamplerStream(1), UNIT):
            assert lo <= 0.5 <= hi

    def test_point_complement(self):
        rows = density_point_check(PointComplement((0, 0, 0)), FULL, [0.5], 1000,
                                   SamplerStream(2), UNIT)
        assert rows[0][1] == 1.0

    def test_radii_must_decrease(self):
        with pytest.raises(StructuralError):
            density_point_check(HalfSpace(0), FULL, [0.1, 1.0], 100, SamplerStream(0), UNIT)


class TestLineProbe:
    def test_transverse_line(self):
        v = aronszajn_line_probe(Slab(0), GroupElement.identity(H1), [1, 0, 0], (-1, 1),
                                 10_000, SamplerStream(0))
        assert v == 0

    def test_line_inside_set(self):
        v = aronszajn_line_probe(Slab(0), GroupElement.identity(H1), [0, 1, 0], (-1, 2),
                                 10_000, SamplerStream(0))
        assert v == 3

    def test_empty(self):
        assert aronszajn_line_probe(Nothing(), GroupElement.identity(H1), [1, 0, 0], (0, 1),
                                    10, SamplerStream(0)) == 0.0

    def test_direction_must_be_horizontal(self):
        with pytest.raises(StructuralError):
            aronszajn_line_probe(Slab(0), GroupElement.identity(H1), [0, 0, 1], (0, 1), 10,
                                 SamplerStream(0))


class TestCAC:
    def test_single_factor(self):
        alg, filt = filtration_preset("l2triple-2", 1)
        nu = HaarBall(filt[0], 1.0, HomogeneousGauge.unit(alg))
        s = SamplerStream(0)
        np.testing.assert_array_equal(sample_many(cac_truncated(filt, [nu]), s, 100),
                                      sample_many(nu, s.child(0), 100))

    def test_two_blocks_project_to_block_convolution(self):
        alg, filt = filtration_preset("l2triple-2", 2)
        g = HomogeneousGauge.unit(alg)
        nu1, nu2 = HaarBall(filt[0], 1.0, g), HaarBall(filt[1], 1.0, g)
        X = sample_many(cac_truncated(filt, [nu1, nu2]), SamplerStream(1), 20_000)
        assert all(filt[1].contains(x) for x in X[:100])
        block = [0, 2, 4]
        # independent draws: block-1 parts of nu2 and nu1 multiplied in H^1
        A = sample_many(nu2, SamplerStream(2), 20_000)[:, block]
        B = sample_many(nu1, SamplerStream(3), 20_000)[:, block]
        ref = multiply_batch(H1, A, B)
        for j in range(3):
            assert two_sample_ks(X[:, block[j]], ref[:, j], 0.001).passed

    def test_support_mismatch(self):
        alg, filt = filtration_preset("l2triple-2", 2)
        g = HomogeneousGauge.unit(alg)
        with pytest.raises(SupportMismatch):
            cac_truncated(filt, [HaarBall(filt[1], 1.0, g), HaarBall(filt[1], 1.0, g)])

    def test_not_nested(self):
        alg, filt = filtration_preset("l2triple-2", 2)
        g = HomogeneousGauge.unit(alg)
        rev = filt[::-1]
        with pytest.raises(FiltrationNotNested):
            cac_truncated(rev, [HaarBall(H, 1.0, g) for H in rev])

    def test_closed_form_epsilon(self):
        alg, filt = filtration_preset("h1", 3)
        nus = [HaarBall(H, 1.0, UNIT) for H in filt]
        eps = choose_epsilons(filt, nus)
        assert eps[2] == 2.0 ** -3 / 2 == 0.0625

    @pytest.mark.parametrize("seed", [5, 6, 7])
    def test_gaussian_epsilon_certified(self, seed):
        # oracle: |Z| for a standard 2-d Gaussian has CDF 1 - exp(-r^2 / 2)
        alg, filt = filtration_preset("full:h1", 6)
        nus = [GaussianLayer1(H1, np.eye(2)) for _ in filt]
        details = []
        eps = choose_epsilons(filt, nus, 0.999, UNIT, SamplerStream(seed), details=details)
        assert all(d["method"] == "monte-carlo" for d in details)
        for i, e in enumerate(eps, start=1):
            mass = 1 - np.exp(-(2.0 ** -i / e) ** 2 / 2)
            assert mass > 1 - 2.0 ** -i
            X = sample_many(dilate_measure(nus[i - 1], e), SamplerStream(100 + i), 20_000)
            lo, hi = wilson_interval(int(np.sum(UNIT(X) < 2.0 ** -i)), 20_000, 0.999)
            assert lo <= mass <= hi

    def test_cauchy_inverse_sequence(self):
        alg, filt = filtration_preset("l2triple-3", 20)
        g = HomogeneousGauge.unit(alg)
        base = [HaarBall(H, 1.0, g) for H in filt]
        eps = choose_epsilons(filt, base)
        P = cac_partial_products([dilate_measure(b, e) for b, e in zip(base, eps)],
                                 SamplerStream(6), 1000)
        one = cauchy_diagnostics(P, g, 1)
        for k, inc in zip(one["k"], one["inverse"]):
            if k >= 8:
                assert inc < 2.0 ** (-k + 2)
        five = cauchy_diagnostics(P, g, 5)
        assert five["inverse"][9] < 2.0 ** -8


class TestSets:
    @pytest.mark.parametrize("data", [
        {"kind": "all"}, {"kind": "empty"}, {"kind": "gauge_ball", "radius": 0.5},
        {"kind": "gauge_ball", "radius": 0.5, "center": [1, 0, 0]},
        {"kind": "halfspace", "coord": 1, "threshold": 0.2, "upper": False},
        {"kind": "slab", "coord": 2, "value": 0.1, "half_width": 0.3},
        {"kind": "point_complement", "point": [0, 0, 0]},
        {"kind": "box", "lo": [-1, -1, -1], "hi": [1, 1, 1], "height": 2.0},
        {"kind": "bump", "center": [0, 0, 0], "half_widths": [1, 1, 1]},
        {"kind": "layer1_cos", "direction": [1, 2]},
    ])
    def test_roundtrip(self, data):
        f = set_from_dict(data, UNIT)
        assert set_from_dict(f.to_dict(), UNIT).to_dict() == f.to_dict()
        X = np.random.default_rng(0).uniform(-1, 1, (20, 3))
        np.testing.assert_array_equal(f(X), set_from_dict(f.to_dict(), UNIT)(X))

    def test_centered_ball(self):
        f = GaugeBall(0.5, UNIT, (1.0, 0.0, 0.0))
        assert f(np.array([[1.0, 0, 0]]))[0] == 1
        assert f(np.array([[0.0, 0, 0]]))[0] == 0

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            set_from_dict({"kind": "torus"})
