"""Pure numpy implementations of the hot kernels.

Signatures match the compiled ``carnot._ext._kernels`` module exactly; see
``carnot.kernels`` for the selection logic.
"""

import numpy as np


def _scatter(K, C, n):
    S = np.zeros((len(K), n))
    S[np.arange(len(K)), K] = C
    return S


def bracket(X, Y, I, J, K, C):
    """Row-wise ``[X_b, Y_b]`` for float arrays of shape ``(B, n)``."""
    n = X.shape[1]
    if len(I) == 0:
        return np.zeros_like(X)
    prod = X[:, I] * Y[:, J] - X[:, J] * Y[:, I]
    return prod @ _scatter(K, C, n)


def bch_multiply(X, Y, I, J, K, C, leaf, operand, coef):
    """Row-wise group product of ``(B, n)`` arrays via a compiled BCH program."""
    out = X + Y
    if len(I) == 0 or len(leaf) == 0:
        return out
    S = _scatter(K, C, X.shape[1])
    values = [X, Y]
    for t in range(len(leaf)):
        a = values[leaf[t]]
        b = values[operand[t]]
        v = (a[:, I] * b[:, J] - a[:, J] * b[:, I]) @ S
        values.append(v)
        if coef[t] != 0.0:
            out += coef[t] * v
    return out


def heat_compose(increments, I, J, K, C, leaf, operand, coef, n):
    """Compose layer-1 increments ``(B, steps, d1)`` left to right from the identity.

    Returns the ``(B, n)`` endpoints ``exp(dB_1) exp(dB_2) ... exp(dB_steps)``.
    """
    B, steps, d1 = increments.shape
    G = np.zeros((B, n))
    Y = np.zeros((B, n))
    for i in range(steps):
        Y[:, :d1] = increments[:, i, :]
        G = bch_multiply(G, Y, I, J, K, C, leaf, operand, coef)
    return G
