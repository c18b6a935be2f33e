"""Fault-count strata of independent Bernoulli locations.

With location probabilities ``p_i`` the number of faults ``k`` in a shot
is Poisson-binomial.  Conditioned on ``k``, the faulted set ``S`` has
probability proportional to ``prod_{i in S} w_i`` with odds
``w_i = p_i / (1 - p_i)``, which :func:`sample_conditional` draws exactly.
"""

from __future__ import annotations

import numpy as np


def poisson_binomial(p, kmax: int) -> np.ndarray:
    """``P(k)`` for ``k = 0..kmax`` (truncated convolution)."""
    p = np.asarray(p, dtype=float)
    if kmax < 0:
        raise ValueError("kmax must be non-negative")
    dist = np.zeros(kmax + 1)
    dist[0] = 1.0
    for q in p:
        dist[1:] = dist[1:] * (1 - q) + dist[:-1] * q
        dist[0] *= 1 - q
    return dist


def _odds(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p >= 1):
        raise ValueError("conditional sampling needs every probability below 1")
    return p / (1 - p)


def suffix_esp(w, kmax: int) -> np.ndarray:
    """``E[r, i]`` = elementary symmetric polynomial ``e_r(w_i, ..., w_{N-1})``."""
    w = np.asarray(w, dtype=float)
    n = len(w)
    E = np.zeros((kmax + 1, n + 1))
    E[0, :] = 1.0
    for i in range(n - 1, -1, -1):
        E[1:, i] = E[1:, i + 1] + w[i] * E[:-1, i + 1]
    return E


def sample_conditional(p, k: int, n_samples: int, rng, table: np.ndarray | None = None) -> np.ndarray:
    """``(n_samples, k)`` sorted location indices, each row an exact draw given ``k`` faults.

    Elements are picked left to right: with ``r`` still to choose from
    ``start``, the next pick is the first ``i`` with
    ``E[r, i+1] <= (1 - u) E[r, start]``.
    """
    w = _odds(p)
    E = suffix_esp(w, k) if table is None else table
    if k == 0:
        return np.zeros((n_samples, 0), np.int64)
    if E[k, 0] <= 0:
        raise ValueError(f"fewer than {k} locations have non-zero probability")
    out = np.empty((n_samples, k), np.int64)
    start = np.zeros(n_samples, np.int64)
    for step in range(k):
        r = k - step
        target = (1.0 - rng.random(n_samples)) * E[r, start]
        # E[r, 1:] is non-increasing, so search its negation
        i = np.searchsorted(-E[r, 1:], -target, side="left")
        # guard against rounding pushing past the last admissible index
        i = np.clip(i, start, len(w) - r)
        out[:, step] = i
        start = i + 1
    return out
