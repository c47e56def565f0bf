"""Named algebras, filtrations and experiment suites."""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .algebra import (
    GradedLieAlgebra,
    abelian,
    build_free_nilpotent,
    build_heisenberg_like,
    build_l2_triple_truncation,
    coordinate_subalgebra,
    full_subalgebra,
    heisenberg,
)
from .errors import AlgebraLoadError, StructuralError

ACCEPTANCE_ALGEBRAS = ("h1", "heisenberg-like-4-1", "free-2-3", "free-3-2",
                       "l2triple-1", "l2triple-2", "l2triple-3")
STEP2_ALGEBRAS = ("h1", "heisenberg-like-4-1", "free-3-2", "l2triple-1", "l2triple-2",
                  "l2triple-3")


def symplectic(n: int) -> list[list[int]]:
    J = [[0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        J[i][n + i] = 1
        J[n + i][i] = -1
    return J


def preset_algebra(name: str) -> GradedLieAlgebra:
    name = name.lower()
    if name in ("h1", "heisenberg"):
        return heisenberg(1)
    m = re.fullmatch(r"h(\d+)", name)
    if m:
        return heisenberg(int(m.group(1)))
    m = re.fullmatch(r"heisenberg-like-(\d+)-1", name)
    if m and int(m.group(1)) % 2 == 0:
        d = int(m.group(1))
        return build_heisenberg_like(d, 1, [symplectic(d // 2)], name=name)
    m = re.fullmatch(r"free-(\d+)-(\d+)", name)
    if m:
        return build_free_nilpotent(int(m.group(1)), int(m.group(2)))
    m = re.fullmatch(r"l2triple-(\d+)", name)
    if m:
        return build_l2_triple_truncation(int(m.group(1)))
    m = re.fullmatch(r"abelian-(\d+)", name)
    if m:
        return abelian(int(m.group(1)))
    raise AlgebraLoadError(f"unknown algebra preset {name!r}")


def load_algebra(source, base_dir: Path | None = None) -> GradedLieAlgebra:
    """Algebra from a preset name, an interchange dict, or ``{"file": path}``."""
    try:
        if isinstance(source, GradedLieAlgebra):
            return source
        if isinstance(source, str):
            if source.endswith(".json"):
                return load_algebra({"file": source}, base_dir)
            return preset_algebra(source)
        if isinstance(source, dict) and "file" in source:
            path = Path(source["file"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return GradedLieAlgebra.from_json(path.read_text())
        if isinstance(source, dict) and "layers" in source:
            return GradedLieAlgebra.from_dict(source)
    except AlgebraLoadError:
        raise
    except (OSError, KeyError, ValueError, TypeError, json.JSONDecodeError) as exc:
        raise AlgebraLoadError(f"cannot load algebra from {source!r}: {exc}") from exc
    raise AlgebraLoadError(f"cannot interpret algebra source {source!r}")


def filtration_preset(name: str, levels: int):
    """``(algebra, [H_1, ..., H_levels])`` for a named filtration.

    ``l2triple-K``: ``H_i`` is the product of the first ``min(i, K)`` Heisenberg
    blocks.  ``h1``: ``H_1`` is the line through ``e1``, then the whole group.
    """
    name = name.lower()
    m = re.fullmatch(r"l2triple-(\d+)", name)
    if m:
        k = int(m.group(1))
        alg = build_l2_triple_truncation(k)
        subs = []
        for i in range(1, levels + 1):
            j = min(i, k)
            idx = list(range(j)) + list(range(k, k + j)) + list(range(2 * k, 2 * k + j))
            subs.append(coordinate_subalgebra(alg, idx))
        return alg, subs
    if name == "h1":
        alg = heisenberg(1)
        line = coordinate_subalgebra(alg, [0])
        return alg, [line] + [full_subalgebra(alg)] * (levels - 1)
    if name.startswith("full:"):
        alg = preset_algebra(name[5:])
        return alg, [full_subalgebra(alg)] * levels
    raise StructuralError(f"unknown filtration preset {name!r}")


def _acceptance_tasks(heat_paths=100_000, heat_steps=1000, scaling_paths=20_000,
                      mass_samples=1_000_000, verify_pairs=100_000):
    algs = list(ACCEPTANCE_ALGEBRAS)
    return [
        {"kind": "jacobi", "name": "algebraic-exactness",
         "params": {"algebras": algs, "vectors": 100}},
        {"kind": "witt", "name": "free-dimensions", "params": {"max_dim": 64}},
        {"kind": "associativity", "name": "bcdh-associativity",
         "params": {"algebras": algs, "triples": 1000, "tol": 1e-9,
                    "closed_form_algebras": list(STEP2_ALGEBRAS), "closed_form_tol": 1e-14}},
        {"kind": "dilation", "name": "dilation-laws",
         "params": {"algebras": algs, "samples": 1000, "tol": 1e-10}},
        {"kind": "gauge", "name": "gauge",
         "params": {"algebras": algs, "homogeneity_samples": 1000, "tol": 1e-12,
                    "calibration_samples": 100_000, "safety": 0.1,
                    "verify_pairs": verify_pairs}},
        {"kind": "psi-jacobian", "name": "psi-jacobian",
         "params": {"algebras": algs, "samples": 100, "tol": 1e-8, "step": 1e-5}},
        {"kind": "submetry", "name": "quotient-submetry",
         "params": {"algebra": "h1", "samples": 100_000, "radii": [0.1, 1.0, 10.0],
                    "quotient_example": {"g": [0, 0, 0], "h": [1, 0, 5],
                                         "ideal": [3], "expected": 1.0, "tol": 1e-4}}},
        {"kind": "mass", "name": "haar-ball-mass",
         "params": {"algebra": "h1", "measure": {"type": "HaarBall", "subgroup": "full",
                                                  "radius": 1.0},
                    "indicator": {"kind": "gauge_ball", "radius": 0.5},
                    "n": mass_samples, "expected": 0.0625}},
        {"kind": "convolution-identity", "name": "convolution-point-mass",
         "params": {"algebra": "h1", "measure": {"type": "HaarBall", "subgroup": "full",
                                                  "radius": 1.0},
                    "n": 100_000, "alpha": 0.01}},
        {"kind": "dilated-support", "name": "dilated-support",
         "params": {"algebra": "h1", "radius": 1.0, "epsilon": 0.01, "n": 100_000}},
        {"kind": "epsilons", "name": "epsilon-selection",
         "params": {"filtration": "l2triple-3", "levels": 20, "radius": 1.0}},
        {"kind": "cauchy", "name": "cac-cauchy",
         "params": {"filtration": "full:h1", "levels": 20, "n_paths": 1000, "k_min": 8}},
        {"kind": "heat", "name": "heat-kernel",
         "params": {"algebra": "h1", "n_paths": heat_paths, "steps": heat_steps, "T": 1.0,
                    "alpha": 0.01, "variance": 0.25}},
        {"kind": "scaling", "name": "time-space-scaling",
         "params": {"algebra": "h1", "n_paths": scaling_paths, "steps": heat_steps,
                    "alpha": 0.01, "negative_control": 2.0}},
        {"kind": "exp-integral", "name": "gauss-haar-change-of-variables",
         "params": {"algebra": "h1", "n": 100_000, "half_widths": [4.0],
                    "functions": [
                        {"kind": "box", "lo": [-0.5, -0.5, -0.5], "hi": [0.5, 0.5, 0.5]},
                        {"kind": "bump", "center": [0.3, -0.2, 0.4],
                         "half_widths": [1.0, 1.0, 1.5]},
                        {"kind": "layer1_cos", "direction": [1.0, -0.5]}]}},
    ]


SUITES = {
    "h1-full-suite": lambda: {"schema": 1, "algebra": "h1", "tasks": _acceptance_tasks()},
    "quick": lambda: {"schema": 1, "algebra": "h1", "tasks": _acceptance_tasks(
        heat_paths=5_000, heat_steps=200, scaling_paths=10_000, mass_samples=100_000,
        verify_pairs=20_000)},
}


def suite_config(name: str, seed: int) -> dict:
    if name not in SUITES:
        raise StructuralError(f"unknown suite {name!r}; known: {sorted(SUITES)}")
    cfg = SUITES[name]()
    cfg["seed"] = seed
    cfg["name"] = name
    return cfg


def random_rational_vectors(rng: np.random.Generator, count: int, dim: int, denom: int = 16):
    from fractions import Fraction
    nums = rng.integers(-denom, denom + 1, size=(count, dim))
    return [[Fraction(int(v), denom) for v in row] for row in nums]
