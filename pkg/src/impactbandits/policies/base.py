"""Shared policy machinery: the select/observe contract, per-discretized-arm
statistics, importance weighting, and the grid covering schedule."""

from __future__ import annotations

import numpy as np

from ..environments import Observation
from ..errors import InternalInconsistency
from ..simplex import MetaArm, SimplexGrid, level_matrix


class Policy:
    """One decision algorithm bound to a single run.

    The harness calls ``bind_rng`` once with the policy's private stream,
    then alternates ``select(t)`` / ``observe(obs)`` for t = 1..T. Both are
    deterministic given the stream.
    """

    name = "policy"
    #: rounds consumed by a fixed warm-up schedule before adaptive play
    warmup_rounds = 0

    def __init__(self):
        self.rng: np.random.Generator | None = None

    def bind_rng(self, rng: np.random.Generator) -> None:
        self.rng = rng

    def select(self, t: int) -> MetaArm:
        raise NotImplementedError

    def observe(self, obs: Observation) -> None:
        raise NotImplementedError


def iw_reward(obs: Observation, arm: int, deployed_prob: float) -> float:
    """Unbiased single-arm reward estimate: realized reward / activation prob."""
    if obs.activated[arm]:
        if deployed_prob <= 0.0:
            raise InternalInconsistency(
                f"arm {arm} activated under deployed probability {deployed_prob}"
            )
        return float(obs.rewards[arm]) / deployed_prob
    return 0.0


def iw_rewards(obs: Observation) -> np.ndarray:
    """Vectorized importance-weighted rewards for every base arm."""
    probs = obs.deployed.probs
    if np.any(obs.activated & (probs <= 0.0)):
        raise InternalInconsistency("an arm activated under zero probability")
    with np.errstate(divide="ignore", invalid="ignore"):
        weighted = np.where(obs.activated, obs.rewards / probs, 0.0)
    return weighted


class DiscretizedStats:
    """Visit counts and reward sums keyed by (base arm, grid level)."""

    def __init__(self, K: int, levels: int):
        self.counts = np.zeros((K, levels + 1))
        self.sums = np.zeros((K, levels + 1))

    def add(self, levels_vec: np.ndarray, values: np.ndarray) -> None:
        arms = np.arange(levels_vec.shape[0])
        self.counts[arms, levels_vec] += 1.0
        self.sums[arms, levels_vec] += values

    def mean(self, arm: int, level: int) -> float:
        c = self.counts[arm, level]
        if c == 0:
            raise ValueError(f"discretized arm ({arm}, {level}) never visited")
        return float(self.sums[arm, level] / c)


def covering_schedule(grid: SimplexGrid) -> list[np.ndarray]:
    """A short deterministic meta-arm sequence touching every discretized arm.

    Greedy: repeatedly pick the highest uncovered level (lowest arm index on
    ties), then fill the remaining arms with their highest uncovered levels
    that keep the level sum feasible. Each level vector is a valid grid meta
    arm, so playing the schedule visits every reachable (arm, level) pair.
    """
    n, K = grid.levels, grid.K
    if K == 1:
        return [np.array([n], dtype=np.int64)]
    j_max = grid.max_level
    uncovered: list[set[int]] = [set(range(1, j_max + 1)) for _ in range(K)]
    schedule: list[np.ndarray] = []
    while any(uncovered):
        j0, k0 = max(
            (max(levels), -k) for k, levels in enumerate(uncovered) if levels
        )
        k0 = -k0
        vec = np.zeros(K, dtype=np.int64)
        vec[k0] = j0
        remaining = n - j0
        others = [k for k in range(K) if k != k0]
        for pos, k in enumerate(others):
            left_after = len(others) - pos - 1
            if left_after == 0:
                choice = remaining
            else:
                cap = remaining - left_after
                open_levels = [j for j in uncovered[k] if j <= cap]
                choice = max(open_levels) if open_levels else 1
            vec[k] = choice
            remaining -= choice
        for k in range(K):
            uncovered[k].discard(int(vec[k]))
        schedule.append(vec)
    return schedule


def enumeration_index(grid: SimplexGrid) -> dict[tuple[int, ...], int]:
    """Map each level vector to its row in the lexicographic enumeration."""
    levels = level_matrix(grid)
    return {tuple(int(x) for x in row): i for i, row in enumerate(levels)}
