"""Scoring kernels for index policies over the enumerated meta-arm matrix.

These are the numeric inner loops: every round (or phase) an index policy
scores all M = C(n-1, K-1) meta arms from per-discretized-arm statistics.
Each kernel has a numba @njit build and a pure-numpy build with identical
semantics. The backend is chosen at import time from the environment flag

    IMPACTBANDITS_NUMBA = auto (default) | 1 | 0

"auto" uses numba when importable, "1" requires it, "0" forces numpy.
Both builds stay importable through `numba_backend` / `numpy_backend` for
the equivalence tests and `benchmarks/bench_kernels.py`.
"""

from __future__ import annotations

import math
import os
from types import SimpleNamespace

import numpy as np


def _ucb_mincount_scores_np(probs, levels, counts, sums, coef, log_num, err):
    """Score[i] = sum_k probs[i,k]*mean[k,levels[i,k]] + coef*sqrt(log_num/minc) + err.

    minc is the smallest visit count among the discretized arms in meta arm
    i; meta arms containing an unvisited discretized arm score +inf.
    """
    arange_k = np.arange(levels.shape[1])
    c = counts[arange_k[None, :], levels]
    s = sums[arange_k[None, :], levels]
    minc = c.min(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        means = np.where(c > 0, s / c, 0.0)
    base = (probs * means).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        bonus = coef * np.sqrt(log_num / minc)
    return np.where(minc > 0, base + bonus + err, np.inf)


def _index_dot_scores_np(probs, levels, arm_index):
    """Score[i] = sum_k probs[i,k] * arm_index[k, levels[i,k]].

    Infinite per-arm indices (unvisited discretized arms under optimism)
    propagate to an infinite meta-arm score.
    """
    arange_k = np.arange(levels.shape[1])
    return (probs * arm_index[arange_k[None, :], levels]).sum(axis=1)


numpy_backend = SimpleNamespace(
    ucb_mincount_scores=_ucb_mincount_scores_np,
    index_dot_scores=_index_dot_scores_np,
)

numba_backend = None
try:
    from numba import njit

    @njit(cache=True)
    def _ucb_mincount_scores_nb(probs, levels, counts, sums, coef, log_num, err):
        m, k = levels.shape
        out = np.empty(m)
        for i in range(m):
            minc = counts[0, levels[i, 0]]
            base = 0.0
            for j in range(k):
                c = counts[j, levels[i, j]]
                if c < minc:
                    minc = c
                if c > 0.0:
                    base += probs[i, j] * (sums[j, levels[i, j]] / c)
            if minc > 0.0:
                out[i] = base + coef * math.sqrt(log_num / minc) + err
            else:
                out[i] = np.inf
        return out

    @njit(cache=True)
    def _index_dot_scores_nb(probs, levels, arm_index):
        m, k = levels.shape
        out = np.empty(m)
        for i in range(m):
            acc = 0.0
            for j in range(k):
                acc += probs[i, j] * arm_index[j, levels[i, j]]
            out[i] = acc
        return out

    numba_backend = SimpleNamespace(
        ucb_mincount_scores=_ucb_mincount_scores_nb,
        index_dot_scores=_index_dot_scores_nb,
    )
except ImportError:
    pass

_flag = os.environ.get("IMPACTBANDITS_NUMBA", "auto").strip().lower()
if _flag in ("0", "false", "off", "no"):
    _active = numpy_backend
elif _flag in ("1", "true", "on", "yes"):
    if numba_backend is None:
        raise ImportError("IMPACTBANDITS_NUMBA=1 but numba is not importable")
    _active = numba_backend
else:
    _active = numba_backend if numba_backend is not None else numpy_backend

USING_NUMBA = _active is numba_backend

ucb_mincount_scores = _active.ucb_mincount_scores
index_dot_scores = _active.index_dot_scores
