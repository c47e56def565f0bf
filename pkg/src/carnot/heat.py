"""Hypoelliptic Brownian motion, windowed Gauss-Haar measures, and their checks."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .algebra import GradedLieAlgebra
from .errors import InvalidSampleSize, StructuralError, SupportLeakage
from .group import dilate_batch, multiply_batch, psi_batch
from .measures import Convolution, Dilated, MeasureSpec, sample_many
from .metrics import HomogeneousGauge
from .rng import BLOCK, SamplerStream
from .stats import bonferroni, mean_and_se, two_sample_ks

PATH_CHUNK = 128


def _cholesky(cov, d1) -> np.ndarray:
    cov = np.atleast_2d(np.asarray(cov, float))
    if cov.shape != (d1, d1) or not np.allclose(cov, cov.T):
        raise StructuralError(f"covariance must be a symmetric {d1}x{d1} matrix")
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise StructuralError("covariance must be positive definite") from None


@dataclass(frozen=True, eq=False)
class HeatKernelSpec(MeasureSpec):
    """Law of ``g_T`` for the left-invariant Brownian motion driven by ``N(0, cov)``.

    Paths compose ``steps`` Gaussian layer-1 increments with the group law.
    For step >= 3 the simulator runs but is experimental.
    """

    algebra: GradedLieAlgebra
    covariance: np.ndarray
    T: float = 1.0
    steps: int = 1000
    type_name = "HeatKernel"

    def __post_init__(self):
        if self.steps < 1:
            raise StructuralError("steps must be >= 1")
        if not self.T > 0:
            raise StructuralError("T must be positive")
        d1 = self.algebra.layer_dims[0]
        object.__setattr__(self, "covariance", np.atleast_2d(np.asarray(self.covariance, float)))
        object.__setattr__(self, "_chol", _cholesky(self.covariance, d1))

    @property
    def experimental(self) -> bool:
        return self.algebra.step > 2

    def increments(self, rng: np.random.Generator, paths: int) -> np.ndarray:
        d1 = self.algebra.layer_dims[0]
        z = rng.standard_normal((paths, self.steps, d1))
        return np.ascontiguousarray(z @ self._chol.T * math.sqrt(self.T / self.steps))

    def sample_block(self, stream, block):
        rng = stream.generator(block)
        alg = self.algebra
        I, J, K, C = alg.sparse_arrays
        prog = alg.bch if len(I) else None
        out = np.empty((BLOCK, alg.dim))
        for lo in range(0, BLOCK, PATH_CHUNK):
            inc = self.increments(rng, PATH_CHUNK)
            if prog is None:
                out[lo: lo + PATH_CHUNK] = 0.0
                out[lo: lo + PATH_CHUNK, : inc.shape[2]] = inc.sum(axis=1)
            else:
                out[lo: lo + PATH_CHUNK] = kernels.heat_compose(
                    inc, I, J, K, C, prog.leaf, prog.operand, prog.coef, alg.dim)
        return out

    def supported_in(self, sub):
        return sub.dim == self.algebra.dim

    def to_dict(self):
        return {"type": self.type_name, "covariance": self.covariance.tolist(),
                "T": self.T, "steps": self.steps}


@dataclass(frozen=True, eq=False)
class GaussHaarWindowSpec(MeasureSpec):
    """``gamma x m`` with ``m`` restricted to the box ``|y_j| <= half_widths[j]``."""

    algebra: GradedLieAlgebra
    covariance: np.ndarray
    half_widths: np.ndarray
    type_name = "GaussHaarWindow"

    def __post_init__(self):
        d1 = self.algebra.layer_dims[0]
        hw = np.asarray(self.half_widths, float).reshape(-1)
        if hw.shape != (self.algebra.dim - d1,):
            raise StructuralError(f"need {self.algebra.dim - d1} box half-widths")
        if np.any(hw < 0):
            raise StructuralError("box half-widths must be nonnegative")
        object.__setattr__(self, "half_widths", hw)
        object.__setattr__(self, "covariance", np.atleast_2d(np.asarray(self.covariance, float)))
        object.__setattr__(self, "_chol", _cholesky(self.covariance, d1))

    def draw_parts(self, rng: np.random.Generator, count: int) -> tuple[np.ndarray, np.ndarray]:
        """Independent ``(x, y)``: ``x`` in layer 1 ~ gamma, ``y`` uniform on the box."""
        d1 = self.algebra.layer_dims[0]
        n = self.algebra.dim
        x = np.zeros((count, n))
        y = np.zeros((count, n))
        x[:, :d1] = rng.standard_normal((count, d1)) @ self._chol.T
        y[:, d1:] = rng.uniform(-1.0, 1.0, (count, n - d1)) * self.half_widths
        return x, y

    def sample_block(self, stream, block):
        x, y = self.draw_parts(stream.generator(block), BLOCK)
        return x + y

    def supported_in(self, sub):
        return sub.dim == self.algebra.dim

    def to_dict(self):
        return {"type": self.type_name, "covariance": self.covariance.tolist(),
                "half_widths": self.half_widths.tolist()}


def heat_spec_from_dict(data: dict, algebra: GradedLieAlgebra) -> MeasureSpec:
    d1 = algebra.layer_dims[0]
    cov = data.get("covariance", np.eye(d1).tolist())
    if data["type"] == "HeatKernel":
        return HeatKernelSpec(algebra, np.asarray(cov, float), float(data.get("T", 1.0)),
                              int(data.get("steps", 1000)))
    return GaussHaarWindowSpec(algebra, np.asarray(cov, float),
                               np.asarray(data["half_widths"], float))


def sample_heat_endpoint(spec: HeatKernelSpec, stream: SamplerStream, index: int):
    from .measures import sample
    if spec.experimental:
        warnings.warn("heat kernel simulation on step >= 3 groups is experimental",
                      stacklevel=2)
    return sample(spec, stream, index)


def sample_gauss_haar(spec: GaussHaarWindowSpec, stream: SamplerStream, index: int):
    from .measures import sample
    return sample(spec, stream, index)


# -- checks -----------------------------------------------------------------------


def random_functionals(dim: int, count: int, stream: SamplerStream) -> np.ndarray:
    v = stream.child("functionals").generator(0).standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def compare_samples(A: np.ndarray, B: np.ndarray, gauge: HomogeneousGauge,
                    functionals: np.ndarray, alpha: float = 0.01) -> dict:
    """Bonferroni-corrected KS on the gauge, every coordinate, and linear functionals."""
    tests = [("gauge", gauge(A), gauge(B))]
    tests += [(f"coord_{j + 1}", A[:, j], B[:, j]) for j in range(A.shape[1])]
    tests += [(f"functional_{m + 1}", A @ f, B @ f) for m, f in enumerate(functionals)]
    level = bonferroni(alpha, len(tests))
    rows = []
    for name, a, b in tests:
        r = two_sample_ks(a, b, level)
        rows.append({"functional": name, "statistic": r.statistic, "threshold": r.threshold,
                     "alpha": level, "pass": r.passed})
    return {"alpha": alpha, "tests": rows, "pass": all(r["pass"] for r in rows)}


def scaling_check(spec: HeatKernelSpec, n_paths: int, stream: SamplerStream,
                  gauge: HomogeneousGauge | None = None, alpha: float = 0.01,
                  dilation: float = math.sqrt(2.0), n_functionals: int = 5,
                  threads: int = 1) -> dict:
    """Two-sample test of ``nu * nu`` against ``(dilate sqrt 2)_* nu``.

    ``dilation`` is exposed so a wrong exponent can serve as a negative control.
    """
    if n_paths < 1:
        raise InvalidSampleSize("n_paths must be positive")
    gauge = gauge or HomogeneousGauge.unit(spec.algebra)
    A = sample_many(Convolution((spec, spec)), stream.child("convolved"), n_paths,
                    threads=threads)
    B = sample_many(Dilated(spec, dilation), stream.child("dilated"), n_paths, threads=threads)
    report = compare_samples(A, B, gauge, random_functionals(spec.algebra.dim, n_functionals,
                                                            stream), alpha)
    report.update(n_paths=n_paths, dilation=dilation, steps=spec.steps)
    return report


def commutator_margin(algebra: GradedLieAlgebra, covariance, half_widths, stream: SamplerStream,
                      tail: float = 1e-6, pilot: int = 4096) -> np.ndarray:
    """Per-coordinate bound on ``|psi_x(y) - y|`` for ``x`` up to the gamma tail radius.

    ``x`` has the direction of a gamma draw and the Mahalanobis length of the
    ``1 - tail`` chi quantile; ``y`` ranges over the box and its corners.
    """
    from scipy.stats import chi

    d1 = algebra.layer_dims[0]
    m = algebra.dim - d1
    if algebra.step <= 2:
        return np.zeros(m)
    L = _cholesky(covariance, d1)
    rng = stream.child("margin").generator(0)
    z = rng.standard_normal((pilot, d1))
    z *= chi.ppf(1 - tail, d1) / np.linalg.norm(z, axis=1, keepdims=True)
    X = z @ L.T
    hw = np.asarray(half_widths, float)
    Y = rng.uniform(-1, 1, (pilot, m)) * hw
    corners = np.where(rng.random((pilot, m)) < 0.5, -1.0, 1.0) * hw
    out = np.zeros(m)
    for x, y, c in zip(X, Y, corners):
        for yy in (y, c):
            out = np.maximum(out, np.abs(psi_batch(algebra, x, yy)[0] - yy))
    return 1.1 * out


def exp_integral_check(algebra: GradedLieAlgebra, covariance, test_functions, half_widths,
                       n: int, stream: SamplerStream, leakage_limit: float = 1e-3) -> dict:
    """Paired estimates of ``E f(x y)`` and ``E f(x + y)`` under windowed ``gamma x m``."""
    spec = GaussHaarWindowSpec(algebra, np.asarray(covariance, float),
                               np.asarray(half_widths, float))
    d1 = algebra.layer_dims[0]
    margin = commutator_margin(algebra, spec.covariance, spec.half_widths, stream)
    inner = spec.half_widths - margin
    rng = stream.child("exp-integral").generator(0)
    x, y = spec.draw_parts(rng, n)
    prod = multiply_batch(algebra, x, y)
    summ = x + y
    near_edge = np.any(np.abs(y[:, d1:]) > inner, axis=1)
    rows = []
    for j, f in enumerate(test_functions):
        lhs = np.asarray(f(prod), float)
        rhs = np.asarray(f(summ), float)
        if f.layer1_only:
            # xy and x + y share their first layer, so the window is irrelevant
            rows.append(_exp_row(f, lhs, rhs, 0.0))
            continue
        box = f.support_box()
        if box is not None:
            lo, hi = box
            if np.any(lo[d1:] < -inner) or np.any(hi[d1:] > inner):
                raise SupportLeakage(f"test function {j} reaches the window margin")
        leak = float(np.mean(near_edge & ((lhs != 0) | (rhs != 0))))
        if leak > leakage_limit:
            raise SupportLeakage(f"test function {j}: {leak:.2e} of its mass sits near the edge")
        rows.append(_exp_row(f, lhs, rhs, leak))
    return {"n": n, "margin": margin.tolist(), "tests": rows,
            "pass": all(r["pass"] for r in rows)}


def _exp_row(f, lhs, rhs, leak) -> dict:
    diff_mean, diff_se = mean_and_se(lhs - rhs)
    lhs_mean, lhs_se = mean_and_se(lhs)
    rhs_mean, rhs_se = mean_and_se(rhs)
    ok = abs(diff_mean) <= 3 * diff_se or diff_mean == 0.0
    return {"function": f.to_dict(), "lhs": lhs_mean, "rhs": rhs_mean, "lhs_se": lhs_se,
            "rhs_se": rhs_se, "difference": diff_mean, "paired_se": diff_se,
            "threshold": 3 * diff_se, "leakage": leak, "pass": bool(ok)}


def levy_area_variance(T: float = 1.0, steps: int | None = None) -> float:
    """Variance of the Heisenberg z-coordinate at time T with unit covariance.

    Exact for the discrete walk with ``steps`` increments; ``None`` is the limit.
    """
    base = T * T / 4.0
    return base if steps is None else base * (1.0 - 1.0 / steps)


def translate_endpoints(algebra: GradedLieAlgebra, h, endpoints) -> np.ndarray:
    """Endpoint samples of ``(L_h)_* nu``, obtained by left multiplication."""
    return multiply_batch(algebra, np.broadcast_to(np.asarray(h, float), endpoints.shape),
                          endpoints)


def dilate_endpoints(algebra: GradedLieAlgebra, lam: float, endpoints) -> np.ndarray:
    return dilate_batch(algebra, lam, endpoints)
