import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from carnot.algebra import build_free_nilpotent, build_from_constants, heisenberg

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def h1():
    return heisenberg(1)


@pytest.fixture(scope="session")
def free23():
    return build_free_nilpotent(2, 3)


def upper_triangular_algebra(m):
    """Strictly upper triangular m x m matrices, graded by superdiagonal.

    Basis E_ij (i < j) ordered by j - i, then i; [E_ij, E_jk] = E_ik.
    Returns (algebra, list of (i, j) index pairs in basis order).
    """
    pairs = [(i, i + k) for k in range(1, m) for i in range(m - k)]
    index = {p: n + 1 for n, p in enumerate(pairs)}
    triples = []
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            if a >= b:
                continue
            if j == k:
                triples.append((a + 1, b + 1, index[(i, l)], 1))
            if l == i:
                triples.append((a + 1, b + 1, index[(k, j)], -1))
    grading = [m - k for k in range(1, m)]
    return build_from_constants(grading, triples, name=f"n{m}"), pairs


def to_matrix(coords, pairs, m):
    M = np.zeros((m, m))
    for c, (i, j) in zip(coords, pairs):
        M[i, j] = c
    return M


def nilpotent_exp(M):
    out = np.eye(len(M))
    term = np.eye(len(M))
    for k in range(1, len(M)):
        term = term @ M / k
        out = out + term
    return out


def nilpotent_log(U):
    N = U - np.eye(len(U))
    out = np.zeros_like(U)
    power = np.eye(len(U))
    for k in range(1, len(U)):
        power = power @ N
        out = out + (-1) ** (k + 1) * power / k
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary():
        terminalreporter.write_line(line)
