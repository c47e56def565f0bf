"""Homogeneous gauges and the left-invariant distances they induce."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .algebra import GradedLieAlgebra, SubalgebraBasis, commutator_ideal
from .errors import (
    AlgebraMismatch,
    CalibrationFailed,
    NotAnIdeal,
    OptimizerDidNotConverge,
    StructuralError,
)
from .group import GroupElement, multiply_batch, project_batch
from .rng import BLOCK, SamplerStream, gather

SUBADDITIVITY_RTOL = 1e-12
QUOTIENT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class HomogeneousGauge:
    """``N(x) = max_i sigma_i |x_i|^(1/i)`` with Euclidean norms on layers."""

    algebra: GradedLieAlgebra
    sigma: tuple[float, ...]
    calibration: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        sig = tuple(float(s) for s in self.sigma)
        if len(sig) != self.algebra.step:
            raise StructuralError(f"need {self.algebra.step} sigma values, got {len(sig)}")
        if sig[0] != 1.0 or any(not s > 0 for s in sig):
            raise StructuralError("sigma_1 must be 1 and all sigma_i positive")
        object.__setattr__(self, "sigma", sig)

    @classmethod
    def unit(cls, algebra: GradedLieAlgebra) -> HomogeneousGauge:
        return cls(algebra, (1.0,) * algebra.step)

    def layer_terms(self, X) -> np.ndarray:
        X = np.asarray(X, float)
        g = self.algebra.grading
        cols = []
        for k in range(1, g.step + 1):
            norm = np.linalg.norm(X[..., g.layer_slice(k)], axis=-1)
            cols.append(self.sigma[k - 1] * norm ** (1.0 / k))
        return np.stack(cols, axis=-1)

    def __call__(self, X) -> np.ndarray:
        """Gauge of coordinate arrays; the last axis is the coordinate axis."""
        return np.max(self.layer_terms(X), axis=-1)

    def norm(self, x) -> float:
        c = x.coords if isinstance(x, GroupElement) else x
        return float(self(np.asarray(c, float)))

    def ball_halfwidths(self, radius: float) -> np.ndarray:
        """Per-layer Euclidean radii ``(r / sigma_k)^k`` of the gauge ball."""
        return np.array([(radius / s) ** k for k, s in enumerate(self.sigma, start=1)])

    def to_dict(self) -> dict:
        return {"sigma": list(self.sigma)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, algebra: GradedLieAlgebra, data: dict) -> HomogeneousGauge:
        return cls(algebra, tuple(data["sigma"]))


def gauge_eval(gauge: HomogeneousGauge, x) -> float:
    return gauge.norm(x)


def distance_batch(gauge: HomogeneousGauge, G, H) -> np.ndarray:
    return gauge(multiply_batch(gauge.algebra, -np.asarray(G, float), H))


def distance(gauge: HomogeneousGauge, g: GroupElement, h: GroupElement) -> float:
    if g.algebra is not h.algebra and not g.algebra.same_structure(h.algebra):
        raise AlgebraMismatch("elements belong to different algebras")
    return float(distance_batch(gauge, g.coords[None], h.coords[None])[0])


# -- calibration ----------------------------------------------------------------


def _box_pairs(algebra: GradedLieAlgebra, radius: float, stream: SamplerStream, count: int,
               threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    widths = radius ** np.asarray(algebra.grading.layers, float)
    n = algebra.dim

    def block(b):
        u = stream.generator(b).uniform(-1.0, 1.0, size=(BLOCK, 2, n))
        return u * widths

    pairs = gather(block, 0, count, threads)
    return pairs[:, 0], pairs[:, 1]


def subadditivity_margins(gauge: HomogeneousGauge, X, Y) -> np.ndarray:
    """Relative margins ``(N(x)+N(y) - N(xy)) / (N(x)+N(y))``; negative = violation."""
    nx, ny = gauge(X), gauge(Y)
    nxy = gauge(multiply_batch(gauge.algebra, X, Y))
    s = nx + ny
    with np.errstate(invalid="ignore", divide="ignore"):
        m = np.where(s > 0, (s - nxy) / s, 0.0)
    return m


def count_violations(gauge: HomogeneousGauge, X, Y) -> int:
    return int(np.sum(subadditivity_margins(gauge, X, Y) < -SUBADDITIVITY_RTOL))


def calibrate_gauge(algebra: GradedLieAlgebra, radius: float = 1.0, samples: int = 10_000,
                    safety: float = 0.1, seed: int = 0, threads: int = 1,
                    stream: SamplerStream | None = None) -> HomogeneousGauge:
    """Find ``sigma`` with no subadditivity violation on a box sample.

    Starts from ``sigma = 1`` and halves ``sigma_2..sigma_s`` while any pair
    violates ``N(xy) <= N(x) + N(y)``, then shrinks them by ``1 - safety``.
    """
    if samples < 10_000:
        raise StructuralError("calibration needs at least 10^4 sample pairs")
    if not 0 <= safety < 1:
        raise StructuralError("safety must lie in [0, 1)")
    stream = stream or SamplerStream(seed, 0).child("calibrate")
    X, Y = _box_pairs(algebra, radius, stream, samples, threads)
    sigma = np.ones(algebra.step)
    rounds = 0
    for rounds in range(61):
        gauge = HomogeneousGauge(algebra, tuple(sigma))
        if count_violations(gauge, X, Y) == 0:
            break
        if rounds == 60:
            raise CalibrationFailed("no admissible sigma after 60 halvings")
        sigma[1:] *= 0.5
    if algebra.step > 1 and not algebra.is_abelian:
        sigma[1:] *= 1.0 - safety
    gauge = HomogeneousGauge(algebra, tuple(sigma))
    margins = subadditivity_margins(gauge, X, Y)
    info = {
        "radius": radius, "samples": samples, "safety": safety, "halvings": rounds,
        "min_margin": float(np.min(margins)),
        "margin_quantiles": [float(q) for q in np.quantile(margins, [0.0, 0.01, 0.5])],
    }
    return HomogeneousGauge(algebra, tuple(sigma), info)


def verify_subadditivity(gauge: HomogeneousGauge, radius: float, samples: int,
                         stream: SamplerStream, threads: int = 1) -> dict:
    X, Y = _box_pairs(gauge.algebra, radius, stream, samples, threads)
    m = subadditivity_margins(gauge, X, Y)
    return {"samples": samples, "violations": int(np.sum(m < -SUBADDITIVITY_RTOL)),
            "min_margin": float(np.min(m))}


# -- quotients ------------------------------------------------------------------


def _is_commutator_block(ideal: SubalgebraBasis) -> bool:
    alg = ideal.parent
    return ideal.same_span(commutator_ideal(alg))


def quotient_distance(gauge: HomogeneousGauge, g: GroupElement, h: GroupElement,
                      ideal: SubalgebraBasis, starts: int = 8) -> float:
    """``inf_n d(g, h n)`` over ``n`` in a graded ideal.

    Coordinate descent from ``starts`` points in a homogeneity-derived box,
    polished with Nelder-Mead.  For the commutator block the closed form
    ``|pi(g) - pi(h)|`` is returned once the optimizer agrees with it.
    """
    alg = gauge.algebra
    if not ideal.is_graded or not ideal.is_ideal():
        raise NotAnIdeal("quotient_distance needs a graded two-sided ideal")
    base = multiply_batch(alg, -g.coords[None], h.coords[None])[0]
    d0 = float(gauge(base))
    if d0 == 0.0 or ideal.dim == 0:
        return d0
    value = _minimize_over_ideal(gauge, base, ideal, d0, starts)
    if _is_commutator_block(ideal):
        closed = float(np.linalg.norm(project_batch(alg, base)))
        if value < closed - 1e-9 or value > closed + QUOTIENT_TOL * max(1.0, closed):
            raise OptimizerDidNotConverge(
                f"optimizer reached {value:.9g}, closed form is {closed:.9g}")
        return closed
    return value


def _minimize_over_ideal(gauge, base, ideal, d0, starts):
    alg = gauge.algebra
    V = ideal.vectors
    halfw = np.array([(4.0 * d0) ** lay for lay in ideal.layers])

    def f(c):
        n = c @ V
        return float(gauge(multiply_batch(alg, base[None], n[None])[0]))

    rng = np.random.default_rng(0)
    inits = [np.zeros(len(V))]
    inits += [rng.uniform(-1, 1, len(V)) * halfw for _ in range(starts - 1)]
    results = []
    for c in inits:
        c = c.copy()
        val = f(c)
        for _ in range(200):
            prev = val
            for m in range(len(c)):
                def line(t, m=m):
                    cc = c.copy()
                    cc[m] = t
                    return f(cc)
                r = minimize_scalar(line, bounds=(-halfw[m], halfw[m]), method="bounded",
                                    options={"xatol": 1e-12 * max(1.0, halfw[m])})
                if r.fun < val:
                    c[m], val = r.x, r.fun
            if prev - val <= 1e-12 * max(1.0, val):
                break
        polish = minimize(f, c, method="Nelder-Mead",
                          options={"xatol": 1e-12, "fatol": 1e-13, "maxiter": 4000})
        if polish.fun < val:
            c, val = polish.x, float(polish.fun)
        results.append(val)
    results.sort()
    best = results[0]
    agree = sum(1 for r in results if r - best <= QUOTIENT_TOL * max(1.0, best))
    if agree < 2:
        raise OptimizerDidNotConverge(
            f"multi-start values disagree beyond {QUOTIENT_TOL}: {results[:3]}")
    return best


# -- Hölder comparison -----------------------------------------------------------


@dataclass(frozen=True)
class HolderConstants:
    c_lower: float   # c with |x - y| <= c d(x, y)
    c_upper: float   # c with d(x, y) <= c |x - y|^(1/s)

    @property
    def c(self) -> float:
        return max(1.0, self.c_lower, self.c_upper)


def holder_constants_from_pairs(gauge: HomogeneousGauge, X, Y) -> HolderConstants:
    X = np.asarray(X, float)
    Y = np.asarray(Y, float)
    d = distance_batch(gauge, X, Y)
    e = np.linalg.norm(X - Y, axis=-1)
    keep = e > 0
    d, e = d[keep], e[keep]
    s = gauge.algebra.step
    return HolderConstants(float(np.max(e / d, initial=0.0)),
                           float(np.max(d / e ** (1.0 / s), initial=0.0)))


def holder_constants(gauge: HomogeneousGauge, box_radius: float, samples: int,
                     stream: SamplerStream, threads: int = 1) -> HolderConstants:
    """Tightest constants for ``c^-1|x-y| <= d(x,y) <= c|x-y|^(1/s)`` on a sample.

    Points are uniform in the Euclidean coordinate cube ``[-R, R]^n``.
    """
    if samples < 10_000:
        raise StructuralError("holder_constants needs at least 10^4 sample pairs")
    n = gauge.algebra.dim

    def block(b):
        return stream.generator(b).uniform(-box_radius, box_radius, size=(BLOCK, 2, n))

    pairs = gather(block, 0, samples, threads)
    return holder_constants_from_pairs(gauge, pairs[:, 0], pairs[:, 1])


def verify_holder(gauge: HomogeneousGauge, constants: HolderConstants, X, Y,
                  slack: float = 0.0) -> int:
    """Number of pairs violating either inequality with constants inflated by ``1 + slack``."""
    d = distance_batch(gauge, X, Y)
    e = np.linalg.norm(np.asarray(X) - np.asarray(Y), axis=-1)
    lo = e > (1 + slack) * constants.c_lower * d * (1 + 1e-12)
    hi = d > (1 + slack) * constants.c_upper * e ** (1.0 / gauge.algebra.step) * (1 + 1e-12)
    return int(np.sum(lo | hi))


def homogeneous_dimension(algebra: GradedLieAlgebra) -> int:
    return algebra.grading.homogeneous_dimension


def unit_ball_volume(gauge: HomogeneousGauge) -> float:
    """Lebesgue volume of the unit gauge ball (a product of Euclidean balls)."""
    vol = 1.0
    for k, (d, s) in enumerate(zip(gauge.algebra.layer_dims, gauge.sigma), start=1):
        r = (1.0 / s) ** k
        vol *= math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r ** d
    return vol
