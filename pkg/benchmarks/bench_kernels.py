"""Compiled vs pure-Python kernel timings.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--rows 20000]

Times ``bch_multiply`` on random row batches and ``heat_compose`` on a batch
of Brownian increments, for several preset algebras, and checks the two
backends agree before reporting the speedup.
"""

import argparse
import timeit

import numpy as np

from carnot import kernels
from carnot.presets import preset_algebra

ALGEBRAS = ["h1", "l2triple-3", "free-2-3", "free-3-3", "free-2-4"]


def _args(alg):
    I, J, K, C = alg.sparse_arrays
    prog = alg.bch
    return I, J, K, C, prog.leaf, prog.operand, prog.coef


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--rows", type=int, default=20_000)
    ap.add_argument("--paths", type=int, default=256)
    ap.add_argument("--steps", type=int, default=200)
    ns = ap.parse_args(argv)

    py = kernels.get_backend("python")
    try:
        cy = kernels.get_backend("cython")
    except ImportError:
        print("compiled extension not built; nothing to compare")
        return 1

    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'algebra':<14}{'python [ms]':>12}{'cython [ms]':>12}{'speedup':>9}")
    for name in ALGEBRAS:
        alg = preset_algebra(name)
        a = _args(alg)
        X = rng.standard_normal((ns.rows, alg.dim))
        Y = rng.standard_normal((ns.rows, alg.dim))
        np.testing.assert_allclose(cy.bch_multiply(X, Y, *a), py.bch_multiply(X, Y, *a),
                                   rtol=1e-12, atol=1e-12)
        tp = _best(lambda: py.bch_multiply(X, Y, *a), ns.repeat)
        tc = _best(lambda: cy.bch_multiply(X, Y, *a), ns.repeat)
        print(f"{'bch_multiply':<14}{name:<14}{1e3 * tp:12.2f}{1e3 * tc:12.2f}{tp / tc:9.1f}")

        d1 = alg.layer_dims[0]
        inc = np.ascontiguousarray(
            rng.standard_normal((ns.paths, ns.steps, d1)) / np.sqrt(ns.steps))
        np.testing.assert_allclose(cy.heat_compose(inc, *a, alg.dim),
                                   py.heat_compose(inc, *a, alg.dim), rtol=1e-10, atol=1e-10)
        tp = _best(lambda: py.heat_compose(inc, *a, alg.dim), ns.repeat)
        tc = _best(lambda: cy.heat_compose(inc, *a, alg.dim), ns.repeat)
        print(f"{'heat_compose':<14}{name:<14}{1e3 * tp:12.2f}{1e3 * tc:12.2f}{tp / tc:9.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
