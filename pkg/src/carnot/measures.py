"""Sampleable probability measures on graded groups and the CAC construction.

A measure is sampled block-wise: ``spec.sample_block(stream, b)`` returns
the ``BLOCK`` draws with indices ``b*BLOCK ... (b+1)*BLOCK - 1``.  Haar
measure in exponential coordinates is Lebesgue measure, so a Haar ball on a
graded subgroup is uniform on a product of Euclidean balls, one per layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebra import (
    GradedLieAlgebra,
    SubalgebraBasis,
    coordinate_subalgebra,
    full_subalgebra,
    subalgebra_closure,
)
from .errors import (
    CertificationFailed,
    FiltrationNotNested,
    InvalidDensityBound,
    RejectionBudgetExceeded,
    StructuralError,
    SupportMismatch,
)
from .group import GroupElement, dilate_batch, multiply_batch
from .metrics import HomogeneousGauge
from .rng import BLOCK, SamplerStream, gather, map_blocks
from .sets import SetFunction
from .stats import clopper_pearson_lower, wilson_interval

REJECTION_BUDGET = 10_000_000
MIN_ACCEPTANCE = 1e-6
CERTIFY_BASE_SAMPLES = 20_000


class MeasureSpec:
    """Base class; subclasses implement ``sample_block``."""

    type_name = ""
    algebra: GradedLieAlgebra

    def sample_block(self, stream: SamplerStream, block: int) -> np.ndarray:
        raise NotImplementedError

    def support_radius(self) -> float | None:
        """Gauge radius of a ball around e containing the support, if known."""
        return None

    def supported_in(self, sub: SubalgebraBasis) -> bool:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


def _subgroup_to_dict(sub: SubalgebraBasis):
    return {"generators": sub.vectors.tolist()}


def _subgroup_from_dict(algebra: GradedLieAlgebra, data) -> SubalgebraBasis:
    if data is None or data == "full":
        return full_subalgebra(algebra)
    if "coordinates" in data:
        return coordinate_subalgebra(algebra, [i - 1 for i in data["coordinates"]])
    return subalgebra_closure(algebra, data["generators"])


def _uniform_ball(rng: np.random.Generator, count: int, dim: int, radius: float) -> np.ndarray:
    z = rng.standard_normal((count, dim))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    r = radius * rng.random((count, 1)) ** (1.0 / dim)
    return z / norms * r


def _haar_ball_draw(sub: SubalgebraBasis, gauge: HomogeneousGauge, radius: float,
                    rng: np.random.Generator, count: int) -> np.ndarray:
    layers = np.asarray(sub.layers)
    coeffs = np.zeros((count, sub.dim))
    for k in sorted(set(sub.layers)):
        idx = np.flatnonzero(layers == k)
        rk = (radius / gauge.sigma[k - 1]) ** k
        coeffs[:, idx] = _uniform_ball(rng, count, len(idx), rk)
    return coeffs @ sub.vectors


@dataclass(frozen=True, eq=False)
class HaarBall(MeasureSpec):
    """Normalized Haar measure of the gauge ball ``B_H(e, radius)``."""

    subgroup: SubalgebraBasis
    radius: float
    gauge: HomogeneousGauge
    type_name = "HaarBall"

    def __post_init__(self):
        if not self.subgroup.is_graded:
            raise StructuralError("HaarBall needs a graded subgroup")
        if not self.radius > 0:
            raise StructuralError("HaarBall radius must be positive")

    @property
    def algebra(self):
        return self.subgroup.parent

    def sample_block(self, stream, block):
        return _haar_ball_draw(self.subgroup, self.gauge, self.radius,
                               stream.generator(block), BLOCK)

    def support_radius(self):
        return float(self.radius)

    def supported_in(self, sub):
        return self.subgroup.spans_subspace_of(sub)

    def to_dict(self):
        return {"type": self.type_name, "subgroup": _subgroup_to_dict(self.subgroup),
                "radius": self.radius}


@dataclass(frozen=True, eq=False)
class GaussianLayer1(MeasureSpec):
    """Centered Gaussian on the first layer with the given covariance (PSD)."""

    algebra: GradedLieAlgebra
    covariance: np.ndarray
    type_name = "GaussianLayer1"

    def __post_init__(self):
        cov = np.atleast_2d(np.asarray(self.covariance, float))
        d1 = self.algebra.layer_dims[0]
        if cov.shape != (d1, d1) or not np.allclose(cov, cov.T):
            raise StructuralError(f"covariance must be a symmetric {d1}x{d1} matrix")
        w, U = np.linalg.eigh(cov)
        if np.min(w) < -1e-12 * max(1.0, np.max(np.abs(w))):
            raise StructuralError("covariance must be positive semi-definite")
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "_factor", U * np.sqrt(np.clip(w, 0, None)))

    def sample_block(self, stream, block):
        d1 = self.algebra.layer_dims[0]
        z = stream.generator(block).standard_normal((BLOCK, d1))
        out = np.zeros((BLOCK, self.algebra.dim))
        out[:, :d1] = z @ self._factor.T
        return out

    def supported_in(self, sub):
        d1 = self.algebra.layer_dims[0]
        cols = np.zeros((d1, self.algebra.dim))
        cols[:, :d1] = self._factor.T
        return all(sub.contains(c) for c in cols if np.linalg.norm(c) > 0)

    def to_dict(self):
        return {"type": self.type_name, "covariance": self.covariance.tolist()}


# -- densities for DensityOnSubgroup ----------------------------------------------


@dataclass(frozen=True)
class NamedDensity:
    """Unnormalized densities against Haar measure, bounded by 1 on their ball.

    ``uniform``: 1.  ``gauge_cone``: ``1 - N(x)/R``.  ``gaussian``:
    ``exp(-|x|^2 / (2 scale^2))``.
    """

    kind: str
    scale: float = 1.0

    def evaluate(self, X, gauge: HomogeneousGauge, radius: float) -> np.ndarray:
        if self.kind == "uniform":
            return np.ones(len(X))
        if self.kind == "gauge_cone":
            return np.clip(1.0 - gauge(X) / radius, 0.0, None)
        if self.kind == "gaussian":
            return np.exp(-np.sum(np.asarray(X) ** 2, axis=1) / (2 * self.scale ** 2))
        raise StructuralError(f"unknown density kind {self.kind!r}")

    def to_dict(self):
        return {"kind": self.kind, "scale": self.scale}


@dataclass(frozen=True, eq=False)
class DensityOnSubgroup(MeasureSpec):
    """Density against Haar on ``subgroup``, rejection-sampled from a Haar ball.

    ``density`` is a ``NamedDensity`` or a callable ``(m, n) -> (m,)``; it must
    satisfy ``0 <= density <= bound`` on the ball of ``radius``.
    """

    subgroup: SubalgebraBasis
    density: NamedDensity | Callable
    radius: float
    bound: float
    gauge: HomogeneousGauge
    type_name = "DensityOnSubgroup"

    def __post_init__(self):
        if not self.bound > 0:
            raise InvalidDensityBound("density bound must be positive")
        if not self.subgroup.is_graded:
            raise StructuralError("DensityOnSubgroup needs a graded subgroup")

    @property
    def algebra(self):
        return self.subgroup.parent

    def _density(self, X):
        if isinstance(self.density, NamedDensity):
            return self.density.evaluate(X, self.gauge, self.radius)
        return np.asarray(self.density(X), float)

    def sample_block(self, stream, block):
        rng = stream.generator(block)
        out = np.empty((BLOCK, self.algebra.dim))
        filled = proposals = 0
        batch = BLOCK
        while filled < BLOCK:
            X = _haar_ball_draw(self.subgroup, self.gauge, self.radius, rng, batch)
            f = self._density(X)
            if np.any(f > self.bound * (1 + 1e-12)) or np.any(f < 0):
                raise InvalidDensityBound(
                    f"density value {float(np.max(f)):.6g} exceeds bound {self.bound}")
            keep = X[rng.random(batch) * self.bound < f]
            take = min(len(keep), BLOCK - filled)
            out[filled: filled + take] = keep[:take]
            filled += take
            proposals += batch
            if proposals >= REJECTION_BUDGET and filled / proposals < MIN_ACCEPTANCE:
                raise RejectionBudgetExceeded(
                    f"acceptance {filled / proposals:.2e} after {proposals} proposals")
            if proposals >= 10 * REJECTION_BUDGET:
                raise RejectionBudgetExceeded(f"block not filled after {proposals} proposals")
            rate = max(filled / proposals, 1e-3)
            batch = int(min(max((BLOCK - filled) / rate * 1.2, 64), 1 << 20))
        return out

    def support_radius(self):
        return float(self.radius)

    def supported_in(self, sub):
        return self.subgroup.spans_subspace_of(sub)

    def to_dict(self):
        if not isinstance(self.density, NamedDensity):
            raise StructuralError("only named densities serialize")
        return {"type": self.type_name, "subgroup": _subgroup_to_dict(self.subgroup),
                "density": self.density.to_dict(), "radius": self.radius, "bound": self.bound}


@dataclass(frozen=True, eq=False)
class PointMass(MeasureSpec):
    element: GroupElement
    type_name = "PointMass"

    @property
    def algebra(self):
        return self.element.algebra

    def sample_block(self, stream, block):
        return np.tile(self.element.coords, (BLOCK, 1))

    def support_radius(self):
        return None

    def supported_in(self, sub):
        return sub.contains(self.element.coords)

    def to_dict(self):
        return {"type": self.type_name, "element": self.element.coords.tolist()}


@dataclass(frozen=True, eq=False)
class Dilated(MeasureSpec):
    """Push-forward of ``base`` under the dilation by ``epsilon``."""

    base: MeasureSpec
    epsilon: float
    type_name = "Dilated"

    @property
    def algebra(self):
        return self.base.algebra

    def sample_block(self, stream, block):
        return dilate_batch(self.algebra, self.epsilon, self.base.sample_block(stream, block))

    def support_radius(self):
        r = self.base.support_radius()
        return None if r is None else abs(self.epsilon) * r

    def supported_in(self, sub):
        return self.base.supported_in(sub)

    def to_dict(self):
        return {"type": self.type_name, "base": self.base.to_dict(), "epsilon": self.epsilon}


@dataclass(frozen=True, eq=False)
class Convolution(MeasureSpec):
    """``mu_0 * mu_1 * ...``: a draw is ``X_0 X_1 ...`` with ``X_j ~ mu_j``."""

    factors: tuple
    type_name = "Convolution"

    def __post_init__(self):
        if not self.factors:
            raise StructuralError("Convolution needs at least one factor")
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def algebra(self):
        return self.factors[0].algebra

    def factor_blocks(self, stream, block) -> list[np.ndarray]:
        return [f.sample_block(stream.child(j), block) for j, f in enumerate(self.factors)]

    def sample_block(self, stream, block):
        parts = self.factor_blocks(stream, block)
        out = parts[0]
        for p in parts[1:]:
            out = multiply_batch(self.algebra, out, p)
        return out

    def supported_in(self, sub):
        return all(f.supported_in(sub) for f in self.factors)

    def to_dict(self):
        return {"type": self.type_name, "factors": [f.to_dict() for f in self.factors]}


def measure_from_dict(data: dict, algebra: GradedLieAlgebra,
                      gauge: HomogeneousGauge | None = None) -> MeasureSpec:
    gauge = gauge or HomogeneousGauge.unit(algebra)
    t = data["type"]
    if t == "HaarBall":
        return HaarBall(_subgroup_from_dict(algebra, data.get("subgroup")),
                        float(data["radius"]), gauge)
    if t == "GaussianLayer1":
        return GaussianLayer1(algebra, np.asarray(data["covariance"], float))
    if t == "DensityOnSubgroup":
        dens = data.get("density", {"kind": "uniform"})
        return DensityOnSubgroup(_subgroup_from_dict(algebra, data.get("subgroup")),
                                 NamedDensity(dens["kind"], float(dens.get("scale", 1.0))),
                                 float(data["radius"]), float(data["bound"]), gauge)
    if t == "PointMass":
        return PointMass(GroupElement(algebra, data["element"]))
    if t == "Dilated":
        return Dilated(measure_from_dict(data["base"], algebra, gauge), float(data["epsilon"]))
    if t == "Convolution":
        return Convolution(tuple(measure_from_dict(f, algebra, gauge) for f in data["factors"]))
    if t in ("HeatKernel", "GaussHaarWindow"):
        from . import heat
        return heat.heat_spec_from_dict(data, algebra)
    raise StructuralError(f"unknown measure type {t!r}")


# -- sampling -----------------------------------------------------------------------


def sample(spec: MeasureSpec, stream: SamplerStream, index: int) -> GroupElement:
    block = spec.sample_block(stream, index // BLOCK)
    return GroupElement(spec.algebra, block[index % BLOCK])


def sample_many(spec: MeasureSpec, stream: SamplerStream, count: int, start: int = 0,
                threads: int = 1) -> np.ndarray:
    if count <= 0:
        return np.zeros((0, spec.algebra.dim))
    return gather(lambda b: spec.sample_block(stream, b), start, count, threads)


def dilate_measure(spec: MeasureSpec, epsilon: float) -> MeasureSpec:
    if not epsilon > 0:
        raise StructuralError("dilate_measure needs epsilon > 0")
    return Dilated(spec, float(epsilon))


# -- CAC construction -------------------------------------------------------------


def check_filtration(filtration: Sequence[SubalgebraBasis]) -> None:
    for a, b in zip(filtration, filtration[1:]):
        if not a.spans_subspace_of(b):
            raise FiltrationNotNested("each subgroup must lie in the next one")


def cac_truncated(filtration: Sequence[SubalgebraBasis],
                  factors: Sequence[MeasureSpec]) -> Convolution:
    """``nu_m * ... * nu_1``: the highest-index factor is leftmost."""
    if len(filtration) != len(factors) or not factors:
        raise StructuralError("need one factor per filtration level")
    check_filtration(filtration)
    for i, (H, nu) in enumerate(zip(filtration, factors), start=1):
        if not nu.supported_in(H):
            raise SupportMismatch(f"factor {i} is not supported on H_{i}")
    return Convolution(tuple(reversed(factors)))


def _certify_epsilon(factor: MeasureSpec, i: int, confidence: float, gauge: HomogeneousGauge,
                     stream: SamplerStream, threads: int) -> tuple[float, dict]:
    r = 2.0 ** -i
    target = 1.0 - r
    n = int(math.ceil(4 * math.log(1 / (1 - confidence)) * 2 ** i)) + CERTIFY_BASE_SAMPLES
    if n > REJECTION_BUDGET:
        raise CertificationFailed(f"level {i} needs more than {REJECTION_BUDGET} samples")
    norms = np.sort(gauge(sample_many(factor, stream, n, threads=threads)))
    lo, hi = 1, n
    if clopper_pearson_lower(n, n, confidence) <= target:
        raise CertificationFailed(f"level {i}: {n} samples cannot certify mass {target}")
    while lo < hi:
        mid = (lo + hi) // 2
        if clopper_pearson_lower(mid, n, confidence) > target:
            hi = mid
        else:
            lo = mid + 1
    t = norms[lo - 1]
    eps = 1.0 if t == 0 else r / t * (1 - 1e-9)
    return eps, {"n": n, "k": int(lo), "quantile_norm": float(t),
                 "lower_bound": clopper_pearson_lower(lo, n, confidence)}


def choose_epsilons(filtration: Sequence[SubalgebraBasis], base_factors: Sequence[MeasureSpec],
                    confidence: float = 0.99, gauge: HomogeneousGauge | None = None,
                    stream: SamplerStream | None = None, threads: int = 1,
                    details: list | None = None) -> list[float]:
    """Scales making ``nu_i^eps(B(e, 2^-i)) > 1 - 2^-i`` for every level ``i``.

    Factors with a known support radius ``R`` get ``2^-i / (2R)``; others are
    certified by a Clopper-Pearson lower bound on a Monte Carlo sample.
    """
    check_filtration(filtration)
    if len(filtration) != len(base_factors):
        raise StructuralError("need one base factor per filtration level")
    out = []
    for i, nu in enumerate(base_factors, start=1):
        R = nu.support_radius()
        if R is not None and R > 0:
            out.append(2.0 ** -i / (2 * R))
            info = {"level": i, "method": "support", "support_radius": R}
        else:
            g = gauge or getattr(nu, "gauge", None) or HomogeneousGauge.unit(nu.algebra)
            st = (stream or SamplerStream(0)).child(("epsilon", i))
            eps, info = _certify_epsilon(nu, i, confidence, g, st, threads)
            info.update(level=i, method="monte-carlo")
            out.append(eps)
        if details is not None:
            details.append(info)
    return out


def cac_partial_products(factors: Sequence[MeasureSpec], stream: SamplerStream, n_paths: int,
                         threads: int = 1) -> np.ndarray:
    """Partial products ``s_k = X_k ... X_1`` for ``k = 1..m``, shape ``(n_paths, m, n)``.

    ``X_i`` is drawn from ``stream.child(i)``.
    """
    alg = factors[0].algebra
    m = len(factors)

    def block(b):
        out = np.empty((BLOCK, m, alg.dim))
        s = factors[0].sample_block(stream.child(1), b)
        out[:, 0] = s
        for i in range(2, m + 1):
            s = multiply_batch(alg, factors[i - 1].sample_block(stream.child(i), b), s)
            out[:, i - 1] = s
        return out

    return gather(block, 0, n_paths, threads)


def cauchy_diagnostics(partials: np.ndarray, gauge: HomogeneousGauge, lag: int = 1) -> dict:
    """Max over paths of ``d(s_k^-1, s_{k+lag}^-1)`` and ``d(s_k, s_{k+lag})`` per ``k``."""
    alg = gauge.algebra
    m = partials.shape[1]
    inv, fwd = [], []
    for k in range(m - lag):
        a, b = partials[:, k], partials[:, k + lag]
        inv.append(float(np.max(gauge(multiply_batch(alg, a, -b)))))
        fwd.append(float(np.max(gauge(multiply_batch(alg, -a, b)))))
    return {"lag": lag, "k": list(range(1, m - lag + 1)), "inverse": inv, "forward": fwd}


# -- estimators ---------------------------------------------------------------------


@dataclass(frozen=True)
class MassEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    n: int
    hits: int

    def to_dict(self):
        return {"estimate": self.estimate, "ci": [self.ci_low, self.ci_high],
                "n": self.n, "hits": self.hits}


def estimate_mass(spec: MeasureSpec, indicator: SetFunction, n_samples: int,
                  stream: SamplerStream, threads: int = 1,
                  confidence: float = 0.99) -> MassEstimate:
    """Monte Carlo mass with a Wilson interval; exact for constant indicators."""
    if n_samples < 100:
        raise StructuralError("estimate_mass needs n_samples >= 100")
    if getattr(indicator, "constant", None) is not None:
        c = float(indicator.constant)
        return MassEstimate(c, c, c, n_samples, int(round(c * n_samples)))
    blocks = range(0, (n_samples + BLOCK - 1) // BLOCK)

    def count(b):
        X = spec.sample_block(stream, b)
        take = min(BLOCK, n_samples - b * BLOCK)
        return int(np.sum(np.asarray(indicator(X[:take])) > 0))

    hits = sum(map_blocks(count, blocks, threads))
    lo, hi = wilson_interval(hits, n_samples, confidence)
    return MassEstimate(hits / n_samples, lo, hi, n_samples, hits)


def density_point_check(indicator: SetFunction, subgroup: SubalgebraBasis, radii,
                        n_per_radius: int, stream: SamplerStream,
                        gauge: HomogeneousGauge, threads: int = 1) -> list[tuple]:
    radii = [float(r) for r in radii]
    if any(r <= 0 for r in radii) or any(a <= b for a, b in zip(radii, radii[1:])):
        raise StructuralError("radii must be positive and strictly decreasing")
    out = []
    for j, r in enumerate(radii):
        est = estimate_mass(HaarBall(subgroup, r, gauge), indicator, n_per_radius,
                            stream.child(("radius", j)), threads)
        out.append((r, est.estimate, (est.ci_low, est.ci_high)))
    return out


def aronszajn_line_probe(indicator: SetFunction, g: GroupElement, Y, t_range, n_points: int,
                         stream: SamplerStream) -> float:
    """Jittered-grid estimate of ``|{t in t_range : g dilate(t, Y) in E}|``."""
    alg = g.algebra
    Y = np.asarray(Y.coords if isinstance(Y, GroupElement) else Y, float)
    if np.any(Y[alg.layer_dims[0]:] != 0):
        raise StructuralError("line direction must lie in the first layer")
    a, b = map(float, t_range)
    if not (np.isfinite(a) and np.isfinite(b) and b > a):
        raise StructuralError("t_range must be a finite interval")
    length = b - a
    if getattr(indicator, "constant", None) is not None:
        return length * float(indicator.constant)
    u = stream.generator(0).random(n_points)
    t = a + (np.arange(n_points) + u) * length / n_points
    pts = multiply_batch(alg, np.broadcast_to(g.coords, (n_points, alg.dim)), t[:, None] * Y)
    return length * float(np.mean(np.asarray(indicator(pts)) > 0))
