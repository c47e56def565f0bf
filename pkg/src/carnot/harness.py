"""Config-driven experiment runner.

A config is JSON with ``"schema": 1``, a mandatory ``"seed"``, an optional
default ``"algebra"``, optional named ``"algebras"`` and ``"measures"``, and
an ordered list of ``"tasks"``.  Each task has a ``"kind"``, an optional
``"name"`` and ``"params"``.  Structural errors abort the run; statistical
failures are recorded in the report.  See ``docs/config.md``.
"""

from __future__ import annotations

import csv
import io
import json
import time
from itertools import combinations
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.stats import norm

from . import __version__
from .algebra import (
    build_free_nilpotent,
    coordinate_subalgebra,
    full_subalgebra,
)
from .errors import ConfigInvalid
from .group import (
    GroupElement,
    dilate_batch,
    multiply_batch,
    project_batch,
    psi_jacobian,
)
from .heat import HeatKernelSpec, exp_integral_check, scaling_check
from .measures import (
    Convolution,
    HaarBall,
    PointMass,
    cac_partial_products,
    cac_truncated,
    cauchy_diagnostics,
    choose_epsilons,
    dilate_measure,
    estimate_mass,
    measure_from_dict,
    sample_many,
)
from .metrics import HomogeneousGauge, calibrate_gauge, quotient_distance, verify_subadditivity
from .oracles import free_nilpotent_cases, witt_layers
from .presets import filtration_preset, load_algebra, random_rational_vectors
from .rng import SamplerStream
from .sets import set_from_dict
from .stats import one_sample_ks, two_sample_ks, variance_and_se

SCHEMA = 1
TIMING_KEYS = ("wall_time",)


def check(name, statistic, threshold, passed, **extra) -> dict:
    row = {"check": name, "statistic": _num(statistic), "threshold": _num(threshold),
           "pass": bool(passed)}
    row.update({k: _num(v) for k, v in extra.items()})
    return row


def _num(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_num(x) for x in v]
    if isinstance(v, dict):
        return {k: _num(x) for k, x in v.items()}
    return v


class Context:
    """Per-run state: seed, threads, declared algebras/measures, cached gauges."""

    def __init__(self, config: dict, threads: int = 1, base_dir: Path | None = None):
        self.config = config
        self.seed = int(config["seed"])
        self.threads = max(1, int(threads))
        self.base_dir = base_dir
        self._algebras = {}
        self._gauges = {}
        for name, src in config.get("algebras", {}).items():
            self._algebras[name] = load_algebra(src, base_dir)
        if "algebra" in config:
            self._algebras["default"] = load_algebra(config["algebra"], base_dir)
        self.measures = dict(config.get("measures", {}))

    def algebra(self, ref=None):
        ref = "default" if ref is None else ref
        if isinstance(ref, str) and ref in self._algebras:
            return self._algebras[ref]
        alg = load_algebra(ref, self.base_dir)
        if isinstance(ref, str):
            self._algebras[ref] = alg
        return alg

    def gauge(self, ref=None):
        key = "default" if ref is None else json.dumps(ref, sort_keys=True)
        if key in self._gauges:
            return self._gauges[key]
        alg = self.algebra(ref)
        spec = self.config.get("gauge", "unit") if ref is None else "unit"
        if spec == "unit":
            g = HomogeneousGauge.unit(alg)
        elif "sigma" in spec:
            g = HomogeneousGauge.from_dict(alg, spec)
        else:
            params = spec.get("calibrate", {})
            g = calibrate_gauge(alg, params.get("radius", 1.0), params.get("samples", 10_000),
                                params.get("safety", 0.1), seed=self.seed,
                                threads=self.threads)
        self._gauges[key] = g
        return g

    def measure(self, ref, algebra, gauge):
        if isinstance(ref, str):
            ref = self.measures[ref]
        return measure_from_dict(ref, algebra, gauge)


# -- tasks ------------------------------------------------------------------------


def task_jacobi(ctx, p, stream):
    rows = []
    rng = np.random.default_rng(stream.generator(0).integers(1 << 62))
    nvec = int(p.get("vectors", 100))
    for name in p["algebras"]:
        alg = ctx.algebra(name)
        worst = Fraction(0)
        for i, j, k in combinations(range(alg.dim), 3):
            for v in alg.jacobi_residual(i, j, k).values():
                worst = max(worst, abs(v))
        rows.append(check(f"{name}: jacobi residual (exact)", worst, 0, worst == 0))
        s = alg.step
        exact_max = Fraction(0)
        float_max = 0.0
        for _ in range(nvec):
            vecs = random_rational_vectors(rng, s + 1, alg.dim)
            ex = alg.nested_bracket_exact(vecs)
            exact_max = max(exact_max, max(abs(v) for v in ex))
            acc = np.array([float(v) for v in vecs[0]])
            for v in vecs[1:]:
                acc = alg.bracket(acc, np.array([float(x) for x in v]))
            float_max = max(float_max, float(np.max(np.abs(acc))))
        rows.append(check(f"{name}: {s + 1}-fold brackets (exact)", exact_max, 0,
                          exact_max == 0))
        rows.append(check(f"{name}: {s + 1}-fold brackets (double)", float_max, 1e-12,
                          float_max <= 1e-12))
    return rows


def task_witt(ctx, p, stream):
    rows = []
    bad = []
    cases = free_nilpotent_cases(int(p.get("max_dim", 64)))
    for rank, step in cases:
        alg = build_free_nilpotent(rank, step, dimension_cap=int(p.get("max_dim", 64)))
        if list(alg.layer_dims) != witt_layers(rank, step):
            bad.append([rank, step])
    rows.append(check("free nilpotent layer dims match Witt counts", len(bad), 0, not bad,
                      cases=len(cases), mismatches=bad))
    return rows


def _rel_err(a, b):
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / scale))


def task_associativity(ctx, p, stream):
    rows = []
    n = int(p.get("triples", 1000))
    tol = float(p.get("tol", 1e-9))
    for j, name in enumerate(p["algebras"]):
        alg = ctx.algebra(name)
        X, Y, Z = stream.child(j).generator(0).uniform(-1, 1, (3, n, alg.dim))
        left = multiply_batch(alg, multiply_batch(alg, X, Y), Z)
        right = multiply_batch(alg, X, multiply_batch(alg, Y, Z))
        err = _rel_err(left, right)
        rows.append(check(f"{name}: (xy)z vs x(yz)", err, tol, err <= tol))
    ctol = float(p.get("closed_form_tol", 1e-14))
    for j, name in enumerate(p.get("closed_form_algebras", [])):
        alg = ctx.algebra(name)
        if alg.step != 2:
            raise ConfigInvalid(f"closed form applies to step-2 algebras, {name} has step {alg.step}")
        X, Y = stream.child(("closed", j)).generator(0).uniform(-1, 1, (2, n, alg.dim))
        d1 = alg.layer_dims[0]
        expect = X + Y
        expect[:, d1:] += 0.5 * alg.bracket(X, Y)[:, d1:]
        err = _rel_err(multiply_batch(alg, X, Y), expect)
        rows.append(check(f"{name}: step-2 closed form", err, ctol, err <= ctol))
    return rows


def task_dilation(ctx, p, stream):
    rows = []
    n = int(p.get("samples", 1000))
    tol = float(p.get("tol", 1e-10))
    for j, name in enumerate(p["algebras"]):
        alg = ctx.algebra(name)
        rng = stream.child(j).generator(0)
        lam, mu = rng.uniform(-3, 3, (2, n))
        X, Y = rng.uniform(-1, 1, (2, n, alg.dim))
        comp_err = 0.0
        auto_err = 0.0
        for i in range(n):
            a = dilate_batch(alg, lam[i] * mu[i], X[i])
            b = dilate_batch(alg, lam[i], dilate_batch(alg, mu[i], X[i]))
            comp_err = max(comp_err, _rel_err(a, b))
        fac = np.asarray(alg.grading.layers, float)
        DX = X * lam[:, None] ** fac
        DY = Y * lam[:, None] ** fac
        lhs = multiply_batch(alg, X, Y) * lam[:, None] ** fac
        auto_err = _rel_err(lhs, multiply_batch(alg, DX, DY))
        rows.append(check(f"{name}: dilation composition", comp_err, tol, comp_err <= tol))
        rows.append(check(f"{name}: dilation automorphism", auto_err, tol, auto_err <= tol))
    return rows


def task_gauge(ctx, p, stream):
    rows = []
    n = int(p.get("homogeneity_samples", 1000))
    tol = float(p.get("tol", 1e-12))
    for j, name in enumerate(p["algebras"]):
        alg = ctx.algebra(name)
        g = calibrate_gauge(alg, float(p.get("radius", 1.0)),
                            int(p.get("calibration_samples", 100_000)),
                            float(p.get("safety", 0.1)),
                            stream=stream.child(("calibrate", j)), threads=ctx.threads)
        rng = stream.child(("homogeneity", j)).generator(0)
        lam = rng.uniform(-3, 3, n)
        X = rng.uniform(-1, 1, (n, alg.dim))
        NX = g(X)
        ND = g(X * lam[:, None] ** np.asarray(alg.grading.layers, float))
        err = float(np.max(np.abs(ND - np.abs(lam) * NX) / np.maximum(1.0, NX)))
        rows.append(check(f"{name}: gauge homogeneity", err, tol, err <= tol))
        ver = verify_subadditivity(g, float(p.get("radius", 1.0)), int(p.get("verify_pairs",
                                   100_000)), stream.child(("verify", j)), ctx.threads)
        rows.append(check(f"{name}: subadditivity violations (fresh sample)", ver["violations"],
                          0, ver["violations"] == 0, sigma=list(g.sigma),
                          min_margin=ver["min_margin"], pairs=ver["samples"]))
    return rows


def task_psi_jacobian(ctx, p, stream):
    rows = []
    n = int(p.get("samples", 100))
    tol = float(p.get("tol", 1e-8))
    h = float(p.get("step", 1e-5))
    for j, name in enumerate(p["algebras"]):
        alg = ctx.algebra(name)
        d1 = alg.layer_dims[0]
        rng = stream.child(j).generator(0)
        worst = 0.0
        for _ in range(n):
            x = np.zeros(alg.dim)
            x[:d1] = rng.uniform(-1, 1, d1)
            y = rng.uniform(-1, 1, alg.dim - d1)
            det = np.linalg.det(psi_jacobian(alg, x, y, h))
            worst = max(worst, abs(det - 1.0))
        rows.append(check(f"{name}: |det D psi_x - 1|", worst, tol, worst <= tol))
    return rows


def task_submetry(ctx, p, stream):
    alg = ctx.algebra(p.get("algebra"))
    gauge = ctx.gauge(p.get("algebra"))
    n = int(p.get("samples", 100_000))
    rows = []
    rng = stream.child("pi").generator(0)
    G = rng.uniform(-1, 1, (n, alg.dim)) * rng.uniform(0, 10, (n, 1)) ** np.asarray(
        alg.grading.layers, float)
    viol = int(np.sum(np.linalg.norm(project_batch(alg, G), axis=1) > gauge(G) * (1 + 1e-12)))
    rows.append(check("|pi(g)| <= d(e, g) violations", viol, 0, viol == 0, samples=n))
    full = full_subalgebra(alg)
    for j, r in enumerate(p.get("radii", [0.1, 1.0, 10.0])):
        st = stream.child(("ball", j))
        centers = st.generator(0).uniform(-1, 1, (n, alg.dim))
        U = sample_many(HaarBall(full, r, gauge), st.child("u"), n, threads=ctx.threads)
        Hs = multiply_batch(alg, centers, U)
        dist = np.linalg.norm(project_batch(alg, Hs) - project_batch(alg, centers), axis=1)
        viol = int(np.sum(dist > r + 1e-9))
        rows.append(check(f"projected ball B(g,{r}) inside B(pi g,{r})", viol, 0, viol == 0))
    ex = p.get("quotient_example")
    if ex:
        ideal = coordinate_subalgebra(alg, [i - 1 for i in ex["ideal"]])
        val = quotient_distance(gauge, GroupElement(alg, ex["g"]), GroupElement(alg, ex["h"]),
                                ideal)
        grid = _grid_quotient_oracle(gauge, np.asarray(ex["g"], float),
                                     np.asarray(ex["h"], float), ideal)
        err = abs(val - ex["expected"])
        rows.append(check("quotient distance example", err, ex["tol"],
                          err <= ex["tol"] and abs(grid - ex["expected"]) <= ex["tol"],
                          value=val, grid_oracle=grid))
    return rows


def _grid_quotient_oracle(gauge, g, h, ideal, points=200_001):
    """Brute-force grid minimum over a one-dimensional ideal."""
    if ideal.dim != 1:
        raise ConfigInvalid("grid oracle supports one-dimensional ideals")
    alg = gauge.algebra
    base = multiply_batch(alg, -g[None], h[None])[0]
    d0 = float(gauge(base))
    w = (4 * max(d0, 1e-12)) ** ideal.layers[0] + abs(base @ ideal.vectors[0])
    t = np.linspace(-w, w, points)
    pts = multiply_batch(alg, np.broadcast_to(base, (points, alg.dim)),
                         t[:, None] * ideal.vectors[0])
    return float(np.min(gauge(pts)))


def task_mass(ctx, p, stream):
    alg = ctx.algebra(p.get("algebra"))
    gauge = ctx.gauge(p.get("algebra"))
    spec = ctx.measure(p["measure"], alg, gauge)
    ind = set_from_dict(p["indicator"], gauge)
    est = estimate_mass(spec, ind, int(p.get("n", 100_000)), stream, ctx.threads)
    rows = []
    if "expected" in p:
        e = float(p["expected"])
        rows.append(check("expected value inside 99% Wilson interval", est.estimate,
                          [est.ci_low, est.ci_high], est.ci_low <= e <= est.ci_high,
                          expected=e, n=est.n))
    else:
        rows.append(check("mass estimate", est.estimate, [est.ci_low, est.ci_high], True,
                          n=est.n))
    return rows


def task_convolution_identity(ctx, p, stream):
    alg = ctx.algebra(p.get("algebra"))
    gauge = ctx.gauge(p.get("algebra"))
    spec = ctx.measure(p["measure"], alg, gauge)
    n = int(p.get("n", 100_000))
    alpha = float(p.get("alpha", 0.01))
    A = sample_many(spec, stream.child("plain"), n, threads=ctx.threads)
    conv = Convolution((spec, PointMass(GroupElement.identity(alg))))
    B = sample_many(conv, stream.child("convolved"), n, threads=ctx.threads)
    r = two_sample_ks(gauge(A), gauge(B), alpha)
    rows = [check("mu * delta_e vs mu (KS on gauge)", r.statistic, r.threshold, r.passed)]
    g = GroupElement(alg, stream.child("g").generator(0).uniform(-1, 1, alg.dim))
    conv_g = Convolution((spec, PointMass(g)))
    C = sample_many(conv_g, stream.child("translate"), 2048)
    X = sample_many(spec, stream.child("translate").child(0), 2048)
    err = float(np.max(np.abs(C - multiply_batch(alg, X, g.coords[None]))))
    rows.append(check("mu * delta_g equals X g per sample", err, 0.0, err == 0.0))
    return rows


def task_dilated_support(ctx, p, stream):
    alg = ctx.algebra(p.get("algebra"))
    gauge = ctx.gauge(p.get("algebra"))
    R, eps, n = float(p.get("radius", 1.0)), float(p.get("epsilon", 0.01)), int(p.get("n", 100_000))
    spec = dilate_measure(HaarBall(full_subalgebra(alg), R, gauge), eps)
    X = sample_many(spec, stream, n, threads=ctx.threads)
    viol = int(np.sum(gauge(X) > eps * R + 1e-9))
    rows = [check("dilated ball support violations", viol, 0, viol == 0, samples=n)]
    ball = set_from_dict({"kind": "gauge_ball", "radius": 1.0}, gauge)
    est = estimate_mass(spec, ball, n, stream.child("mass"), ctx.threads)
    rows.append(check("mass of unit ball under dilated measure", est.estimate, 0.999,
                      est.estimate >= 0.999))
    return rows


def task_epsilons(ctx, p, stream):
    alg, filt = filtration_preset(p["filtration"], int(p.get("levels", 10)))
    gauge = HomogeneousGauge.unit(alg)
    R = float(p.get("radius", 1.0))
    factors = [HaarBall(H, R, gauge) for H in filt]
    eps = choose_epsilons(filt, factors, gauge=gauge, stream=stream)
    worst = 0.0
    ok = True
    for i, e in enumerate(eps, start=1):
        exact_ok = Fraction(e) * Fraction(R) * 2 <= Fraction(1, 2 ** i)
        ok &= exact_ok
        worst = max(worst, e * R * 2 ** i)
    rows = [check("eps_i R_i <= 2^-i / 2 (exact)", worst, 0.5, ok and worst <= 0.5,
                  epsilons=eps)]
    n = int(p.get("n", 10_000))
    supp_viol = 0
    for i, (H, e) in enumerate(zip(filt, eps), start=1):
        X = sample_many(dilate_measure(factors[i - 1], e), stream.child(("support", i)), n)
        supp_viol += int(np.sum(gauge(X) >= 2.0 ** -i))
    rows.append(check("dilated factor samples inside B(e, 2^-i)", supp_viol, 0, supp_viol == 0))
    return rows


def task_cauchy(ctx, p, stream):
    levels = int(p.get("levels", 20))
    alg, filt = filtration_preset(p["filtration"], levels)
    gauge = HomogeneousGauge.unit(alg)
    R = float(p.get("radius", 1.0))
    base = [HaarBall(H, R, gauge) for H in filt]
    eps = choose_epsilons(filt, base, gauge=gauge, stream=stream)
    factors = [dilate_measure(b, e) for b, e in zip(base, eps)]
    cac_truncated(filt, factors)
    partials = cac_partial_products(factors, stream.child("paths"), int(p.get("n_paths", 1000)),
                                    ctx.threads)
    diag = cauchy_diagnostics(partials, gauge, 1)
    k_min = int(p.get("k_min", 8))
    rows = []
    worst_ratio = 0.0
    ok = True
    for k, inc in zip(diag["k"], diag["inverse"]):
        if k >= k_min:
            bound = 2.0 ** (-k + 2)
            ok &= inc < bound
            worst_ratio = max(worst_ratio, inc / bound)
    rows.append(check(f"inverse increments below 2^(-k+2) for k >= {k_min}", worst_ratio, 1.0,
                      ok, increments=diag["inverse"]))
    fwd_max = max(diag["forward"], default=0.0)
    rows.append(check("max d(s_k, s_k+1) (advisory)", fwd_max, None, True))
    return rows


def task_heat(ctx, p, stream):
    alg = ctx.algebra(p.get("algebra"))
    d1 = alg.layer_dims[0]
    cov = np.asarray(p.get("covariance", np.eye(d1).tolist()), float)
    spec = HeatKernelSpec(alg, cov, float(p.get("T", 1.0)), int(p.get("steps", 1000)))
    n = int(p.get("n_paths", 100_000))
    alpha = float(p.get("alpha", 0.01))
    E = sample_many(spec, stream, n, threads=ctx.threads)
    rows = []
    L = np.linalg.cholesky(cov * spec.T)
    W = np.linalg.solve(L, E[:, :d1].T).T
    level = alpha / d1
    for j in range(d1):
        r = one_sample_ks(W[:, j], norm.cdf, level)
        rows.append(check(f"layer-1 whitened coord {j + 1} vs N(0,1) (KS)", r.statistic,
                          r.threshold, r.passed))
    if "variance" in p and alg.step == 2:
        var, se = variance_and_se(E[:, d1])
        target = float(p["variance"])
        rows.append(check("z variance vs Levy-area value", abs(var - target), 3 * se,
                          abs(var - target) <= 3 * se, variance=var, se=se))
    finite = bool(np.all(np.isfinite(E)))
    rows.append(check("all endpoints finite", int(not finite), 0, finite))
    return rows


def task_scaling(ctx, p, stream):
    alg = ctx.algebra(p.get("algebra"))
    d1 = alg.layer_dims[0]
    cov = np.asarray(p.get("covariance", np.eye(d1).tolist()), float)
    spec = HeatKernelSpec(alg, cov, float(p.get("T", 1.0)), int(p.get("steps", 1000)))
    gauge = ctx.gauge(p.get("algebra"))
    n = int(p.get("n_paths", 20_000))
    if n < 10_000:
        raise ConfigInvalid("scaling check needs n_paths >= 10^4")
    alpha = float(p.get("alpha", 0.01))
    rep = scaling_check(spec, n, stream, gauge, alpha, threads=ctx.threads)
    worst = max(t["statistic"] / t["threshold"] for t in rep["tests"])
    rows = [check("nu*nu vs dilate(sqrt2) nu, all functionals (Bonferroni)", worst, 1.0,
                  rep["pass"], tests=rep["tests"])]
    wrong = p.get("negative_control")
    if wrong is not None:
        neg = scaling_check(spec, n, stream, gauge, alpha, dilation=float(wrong),
                            threads=ctx.threads)
        worst = max(t["statistic"] / t["threshold"] for t in neg["tests"])
        rows.append(check(f"negative control dilation {wrong} rejected", worst, 1.0,
                          not neg["pass"]))
    return rows


def task_exp_integral(ctx, p, stream):
    alg = ctx.algebra(p.get("algebra"))
    d1 = alg.layer_dims[0]
    cov = np.asarray(p.get("covariance", np.eye(d1).tolist()), float)
    funcs = [set_from_dict(f, ctx.gauge(p.get("algebra"))) for f in p["functions"]]
    rep = exp_integral_check(alg, cov, funcs, p["half_widths"], int(p.get("n", 100_000)),
                             stream)
    return [check(f"E f(xy) = E f(x+y): {t['function']['kind']}", abs(t["difference"]),
                  t["threshold"], t["pass"], lhs=t["lhs"], rhs=t["rhs"])
            for t in rep["tests"]]


def task_line_probe(ctx, p, stream):
    from .measures import aronszajn_line_probe
    alg = ctx.algebra(p.get("algebra"))
    ind = set_from_dict(p["indicator"], ctx.gauge(p.get("algebra")))
    g = GroupElement(alg, p.get("g", [0.0] * alg.dim))
    val = aronszajn_line_probe(ind, g, np.asarray(p["Y"], float), p["t_range"],
                               int(p.get("n_points", 10_000)), stream)
    rows = [check("line measure estimate", val, p.get("expected"), True)]
    if "expected" in p:
        tol = float(p.get("tol", 1e-9))
        rows = [check("line measure estimate", abs(val - p["expected"]), tol,
                      abs(val - p["expected"]) <= tol, value=val)]
    return rows


def null_probe(indicator, filtration: str, translates, levels, n: int, stream: SamplerStream,
               radius: float = 1.0, threads: int = 1) -> list[dict]:
    """Masses of ``E`` under left translates of truncated CAC measures.

    Factors are Haar balls on ``H_i`` dilated by the closed-form epsilons.
    Advisory only: no null / non-null verdict is drawn.
    """
    levels = [int(k) for k in levels]
    alg, filt = filtration_preset(filtration, max(levels))
    gauge = HomogeneousGauge.unit(alg)
    base = [HaarBall(H, radius, gauge) for H in filt]
    eps = choose_epsilons(filt, base, gauge=gauge)
    factors = [dilate_measure(b, e) for b, e in zip(base, eps)]
    if not callable(indicator):
        indicator = set_from_dict(indicator, gauge)
    table = []
    for k in levels:
        cac = cac_truncated(filt[:k], factors[:k])
        for j, t in enumerate(translates):
            g = GroupElement(alg, t)
            spec = Convolution((PointMass(g), cac))
            est = estimate_mass(spec, indicator, n, stream.child((k, j)), threads)
            table.append({"level": k, "translate": list(map(float, t)), **est.to_dict()})
    return table


def task_null_probe(ctx, p, stream):
    table = null_probe(p["indicator"], p["filtration"], p["translates"], p["levels"],
                       int(p.get("n", 10_000)), stream, float(p.get("radius", 1.0)),
                       ctx.threads)
    return [check("null probe table (advisory)", None, None, True, table=table)]


TASKS = {
    "jacobi": task_jacobi,
    "witt": task_witt,
    "associativity": task_associativity,
    "dilation": task_dilation,
    "gauge": task_gauge,
    "psi-jacobian": task_psi_jacobian,
    "submetry": task_submetry,
    "mass": task_mass,
    "convolution-identity": task_convolution_identity,
    "dilated-support": task_dilated_support,
    "epsilons": task_epsilons,
    "cauchy": task_cauchy,
    "cac": task_cauchy,
    "heat": task_heat,
    "scaling": task_scaling,
    "exp-integral": task_exp_integral,
    "line-probe": task_line_probe,
    "null-probe": task_null_probe,
}


# -- config + run -------------------------------------------------------------------


def validate_config(config) -> dict:
    if not isinstance(config, dict):
        raise ConfigInvalid("config must be a JSON object")
    if config.get("schema") != SCHEMA:
        raise ConfigInvalid(f"config must declare \"schema\": {SCHEMA}")
    if "seed" not in config:
        raise ConfigInvalid("config needs a root \"seed\"")
    seed = config["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2 ** 64:
        raise ConfigInvalid("seed must be an unsigned 64-bit integer")
    tasks = config.get("tasks", [])
    if not isinstance(tasks, list):
        raise ConfigInvalid("tasks must be a list")
    declared_measures = set(config.get("measures", {}))
    declared_algebras = set(config.get("algebras", {})) | ({"default"} if "algebra" in config
                                                             else set())
    for i, t in enumerate(tasks):
        if not isinstance(t, dict) or t.get("kind") not in TASKS:
            raise ConfigInvalid(f"task {i}: unknown kind {t.get('kind') if isinstance(t, dict) else t!r}")
        params = t.get("params", {})
        if not isinstance(params, dict):
            raise ConfigInvalid(f"task {i}: params must be an object")
        m = params.get("measure")
        if isinstance(m, str) and m not in declared_measures:
            raise ConfigInvalid(f"task {i}: measure {m!r} is not declared")
        a = params.get("algebra")
        if a is None and t["kind"] in _NEEDS_DEFAULT_ALGEBRA and "default" not in declared_algebras:
            raise ConfigInvalid(f"task {i}: no algebra given and no default declared")
    return config


_NEEDS_DEFAULT_ALGEBRA = {"submetry", "mass", "convolution-identity", "dilated-support", "heat",
                          "scaling", "exp-integral", "line-probe"}


def run(config: dict, threads: int = 1, base_dir: Path | None = None) -> dict:
    """Execute the tasks of ``config`` in order and return the report."""
    validate_config(config)
    t0 = time.perf_counter()
    ctx = Context(config, threads, base_dir)
    results = []
    seen: dict[str, int] = {}
    for task in config.get("tasks", []):
        name = task.get("name", task["kind"])
        # ordinal counts repeats of a name, so unrelated tasks never shift streams
        ordinal = seen.get(name, 0)
        seen[name] = ordinal + 1
        stream = SamplerStream.for_task(ctx.seed, name, ordinal)
        checks = TASKS[task["kind"]](ctx, task.get("params", {}), stream)
        results.append({"name": name, "kind": task["kind"], "stream_id": stream.stream_id,
                        "checks": checks, "pass": all(c["pass"] for c in checks)})
    return {
        "tool": "carnot",
        "version": __version__,
        "schema": SCHEMA,
        "seed": ctx.seed,
        "config": config,
        "tasks": results,
        "pass": all(r["pass"] for r in results),
        "wall_time": time.perf_counter() - t0,
    }


def strip_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k not in TIMING_KEYS}


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, default=_num) + "\n"


def report_to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["task", "check", "statistic", "threshold", "pass"])
    for t in report["tasks"]:
        for c in t["checks"]:
            w.writerow([t["name"], c["check"], json.dumps(c["statistic"]),
                        json.dumps(c["threshold"]), c["pass"]])
    return buf.getvalue()


def summary_lines(report: dict) -> list[str]:
    out = []
    for t in report["tasks"]:
        for c in t["checks"]:
            flag = "PASS" if c["pass"] else "FAIL"
            out.append(f"[{flag}] {t['name']}: {c['check']} "
                       f"(statistic={_short(c['statistic'])}, threshold={_short(c['threshold'])})")
    return out


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, list) and len(v) > 4:
        return f"[{len(v)} values]"
    return str(v)
