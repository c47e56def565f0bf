"""Closed-form reference values used by the experiment checks."""

from __future__ import annotations


def mobius(n: int) -> int:
    if n == 1:
        return 1
    result, p, m = 1, 2, n
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    if m > 1:
        result = -result
    return result


def witt_dimension(rank: int, degree: int) -> int:
    """Dimension of the degree-``degree`` part of the free Lie algebra on ``rank`` letters."""
    total = sum(mobius(d) * rank ** (degree // d) for d in range(1, degree + 1)
                if degree % d == 0)
    return total // degree


def witt_layers(rank: int, step: int) -> list[int]:
    dims = [witt_dimension(rank, k) for k in range(1, step + 1)]
    while dims and dims[-1] == 0:
        dims.pop()
    return dims


def free_nilpotent_cases(max_dim: int = 64) -> list[tuple[int, int]]:
    """All ``(rank, step)`` whose free nilpotent algebra has dimension ``<= max_dim``.

    Rank 1 contributes only step 1 (higher steps add no dimensions).
    """
    cases = []
    for rank in range(1, max_dim + 1):
        step = 1
        while True:
            if rank == 1 and step > 1:
                break
            if sum(witt_layers(rank, step)) > max_dim:
                break
            cases.append((rank, step))
            step += 1
    return cases
