"""Meta arms on the epsilon-discretized probability simplex.

Grid probabilities are represented as integer level counts over a common
denominator n = 1/epsilon, so the sum-to-one invariant is exact and
enumeration order is deterministic. Floating point enters only when a level
vector is converted to a probability vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator

import numpy as np

from .errors import EmptyActionSpace, InvalidDiscretization

SUM_TOL = 1e-9

# Exhaustive benchmark searches refuse to enumerate more meta arms than this.
MAX_ORACLE_ARMS = 2_000_000


class MetaArm:
    """A mixed strategy over K base arms.

    ``probs`` always sums to one (within ``SUM_TOL``) with nonnegative
    entries. ``levels`` carries the integer grid indices when the strategy
    lies on a discretization grid, and is ``None`` for off-grid strategies
    (e.g. exponential-weights distributions or one-hot pulls).
    """

    __slots__ = ("probs", "levels")

    def __init__(self, probs, levels=None, validate: bool = True):
        self.probs = np.asarray(probs, dtype=np.float64)
        self.levels = None if levels is None else np.asarray(levels, dtype=np.int64)
        if validate:
            if self.probs.ndim != 1 or self.probs.size == 0:
                raise ValueError("meta arm needs a nonempty 1-d probability vector")
            if np.any(self.probs < 0.0):
                raise ValueError(f"negative probability in meta arm: {self.probs}")
            total = float(self.probs.sum())
            if abs(total - 1.0) > SUM_TOL:
                raise ValueError(f"meta arm probabilities sum to {total!r}, not 1")
        self.probs.flags.writeable = False

    @property
    def K(self) -> int:
        return self.probs.shape[0]

    def __len__(self) -> int:
        return self.probs.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, MetaArm) and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())

    def __repr__(self) -> str:
        body = ", ".join(f"{p:.6g}" for p in self.probs)
        return f"MetaArm([{body}])"


@dataclass(frozen=True)
class SimplexGrid:
    """Uniform discretization of the simplex with step 1/levels per arm."""

    K: int
    levels: int  # n = 1/epsilon

    @property
    def epsilon(self) -> Fraction:
        return Fraction(1, self.levels)

    @property
    def feasible(self) -> bool:
        # Every arm must take probability >= epsilon, so K*epsilon <= 1.
        return self.K <= self.levels

    @property
    def max_level(self) -> int:
        """Largest level any arm can take inside a feasible meta arm."""
        return self.levels if self.K == 1 else self.levels - self.K + 1

    def arm_count(self) -> int:
        """Number of meta arms, C(n-1, K-1)."""
        if not self.feasible:
            return 0
        return math.comb(self.levels - 1, self.K - 1)


@dataclass(frozen=True)
class DiscretizedArm:
    """One (base arm, grid probability) pair."""

    arm: int
    level: int

    def probability(self, grid: SimplexGrid) -> Fraction:
        return Fraction(self.level, grid.levels)


def as_unit_fraction(value) -> int:
    """Return n such that value == 1/n, or raise InvalidDiscretization.

    Accepts a Fraction, an int (n itself is not accepted; 1 means epsilon=1),
    a float, or a string like "1/4" or "0.25".
    """
    if isinstance(value, Fraction):
        if value.numerator != 1 or value.denominator < 1:
            raise InvalidDiscretization(f"step {value} is not of the form 1/n")
        return value.denominator
    if isinstance(value, str):
        text = value.strip()
        try:
            frac = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidDiscretization(f"cannot parse grid step {value!r}") from exc
        return as_unit_fraction(frac)
    if isinstance(value, int):
        if value != 1:
            raise InvalidDiscretization(f"step {value} is not of the form 1/n")
        return 1
    x = float(value)
    if not 0.0 < x <= 1.0:
        raise InvalidDiscretization(f"step {x} outside (0, 1]")
    n = round(1.0 / x)
    if n < 1 or abs(n * x - 1.0) > 1e-9:
        raise InvalidDiscretization(f"1/{x} is not an integer")
    return n


def make_grid(K: int, epsilon) -> SimplexGrid:
    """Build the grid with step epsilon = 1/n.

    The grid is constructible even when K*epsilon > 1; it is then marked
    infeasible and enumeration raises EmptyActionSpace.
    """
    if K < 1:
        raise ValueError(f"need at least one arm, got K={K}")
    return SimplexGrid(K=K, levels=as_unit_fraction(epsilon))


def iter_level_vectors(grid: SimplexGrid) -> Iterator[tuple[int, ...]]:
    """Yield positive compositions of n into K parts in lexicographic order.

    Cut-point combinations map to compositions monotonically, so the
    lexicographic order of the yielded tuples follows for free.
    """
    if not grid.feasible:
        raise EmptyActionSpace(
            f"K*epsilon = {grid.K}/{grid.levels} > 1: no meta arm exists"
        )
    n, K = grid.levels, grid.K
    if K == 1:
        yield (n,)
        return
    for cuts in combinations(range(1, n), K - 1):
        prev = 0
        parts = []
        for c in cuts:
            parts.append(c - prev)
            prev = c
        parts.append(n - prev)
        yield tuple(parts)


def level_matrix(grid: SimplexGrid) -> np.ndarray:
    """All feasible level vectors as an (M, K) int64 matrix, lexicographic."""
    rows = list(iter_level_vectors(grid))
    return np.asarray(rows, dtype=np.int64).reshape(len(rows), grid.K)


def enumerate_meta_arms(grid: SimplexGrid) -> list[MetaArm]:
    """All meta arms on the grid, lexicographically ordered."""
    levels = level_matrix(grid)
    probs = levels / float(grid.levels)
    return [
        MetaArm(probs[i], levels[i], validate=False) for i in range(levels.shape[0])
    ]


def default_benchmark_resolution(K: int, policy_levels: int) -> Fraction:
    """Resolution for the best-fixed-strategy oracle.

    Targets a step of min(epsilon/4, 1/200) while keeping the oracle grid a
    refinement of the policy grid (so the benchmark dominates every policy
    arm) and keeping the exhaustive enumeration below MAX_ORACLE_ARMS.
    """
    n = policy_levels
    c = max(4, math.ceil(200 / n))
    while c > 1 and math.comb(c * n - 1, K - 1) > MAX_ORACLE_ARMS:
        c -= 1
    return Fraction(1, c * n)


def best_fixed_strategy(model, resolution) -> tuple[MetaArm, float]:
    """Exhaustive search for the best constant strategy on a grid.

    Deploying a fixed p from round one pins the discounted frequency at p
    exactly, so the benchmark value of p is U(p) = sum_k p_k r_k(p_k) per
    round. Ties break to the lexicographically smallest meta arm.
    """
    grid = make_grid(model.K, resolution)
    if grid.arm_count() > MAX_ORACLE_ARMS:
        raise EmptyActionSpace(
            f"oracle grid with {grid.arm_count()} meta arms is too large; "
            f"use a coarser resolution"
        )
    n = grid.levels
    best_util = -np.inf
    best_levels: tuple[int, ...] | None = None
    chunk: list[tuple[int, ...]] = []

    def flush():
        nonlocal best_util, best_levels
        if not chunk:
            return
        block = np.asarray(chunk, dtype=np.int64)
        probs = block / float(n)
        util = np.zeros(block.shape[0])
        for k in range(model.K):
            util += probs[:, k] * model.mean_curve(k, probs[:, k])
        i = int(np.argmax(util))
        # Strict inequality keeps the first (lexicographically smallest) maximizer.
        if util[i] > best_util:
            best_util = float(util[i])
            best_levels = tuple(block[i])

    for vec in iter_level_vectors(grid):
        chunk.append(vec)
        if len(chunk) >= 1 << 16:
            flush()
            chunk.clear()
    flush()

    assert best_levels is not None
    levels = np.asarray(best_levels, dtype=np.int64)
    return MetaArm(levels / float(n), levels, validate=False), best_util
