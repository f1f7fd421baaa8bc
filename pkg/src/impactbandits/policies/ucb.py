"""The two UCB algorithms for impact-driven rewards.

ActionDependentUCB handles the zero-discount case: importance-weighted
per-discretized-arm means plus a min-count exploration bonus, maximized
over the whole meta-arm grid each round.

HistoryDependentUCB wraps the same statistics in a phased schedule: each
phase replays one meta arm for L rounds, the first s_a rounds drive the
discounted frequency toward the target ("approaching"), the rest collect
samples ("estimation"); phase-end scores add a bias allowance for the
residual drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .. import kernels
from ..errors import InvalidHorizon
from ..simplex import MetaArm, SimplexGrid, level_matrix
from .base import DiscretizedStats, Policy, covering_schedule, enumeration_index, iw_rewards


def bias_allowance(K: int, gamma: float, s_a: int, lipschitz_star: float) -> float:
    """err = K * gamma^s_a * (L* + 1): bound on the estimation bias left
    after s_a approaching rounds."""
    return K * gamma**s_a * (lipschitz_star + 1.0)


def phase_lengths_for_epsilon(
    eps: Fraction, K: int, gamma: float, rho: float
) -> tuple[int, int]:
    """(s_a, L) for a given grid step: gamma^s_a ~ epsilon^(1/3)/K and
    L = ceil(s_a/(1-rho))."""
    if not 0.0 < rho < 1.0:
        raise ValueError(f"estimation ratio must lie in (0, 1), got {rho}")
    if gamma == 0.0:
        s_a = 1
    else:
        s_a = max(
            1, math.ceil(math.log(float(eps) ** (1.0 / 3.0) / K) / math.log(gamma))
        )
    L = math.ceil(s_a / (1.0 - rho))
    return s_a, L


def schedule_params(
    T: int,
    K: int,
    gamma: float,
    rho: float,
    lipschitz_star: float = 1.0,
    c_eps: float = 1.0,
    n_max: int = 256,
) -> tuple[Fraction, int, int]:
    """Horizon-driven defaults (epsilon, s_a, L).

    epsilon = 1/n with n ~ c_eps * (T/ln T)^(1/3) clamped to [K, n_max].
    The Lipschitz scale is absorbed into the constant (tune c_eps instead).
    """
    if T < 2:
        raise InvalidHorizon(f"horizon {T} too short for the schedule")
    del lipschitz_star
    n = int(round((T / math.log(T)) ** (1.0 / 3.0) * c_eps))
    n = max(K, min(n, n_max))
    eps = Fraction(1, n)
    s_a, L = phase_lengths_for_epsilon(eps, K, gamma, rho)
    return eps, s_a, L


class _GridIndexPolicy(Policy):
    """Common scaffolding for policies scoring the enumerated meta-arm grid."""

    def __init__(self, grid: SimplexGrid, tie_break: str = "lexicographic"):
        super().__init__()
        self.grid = grid
        self.level_rows = level_matrix(grid)
        self.prob_rows = self.level_rows / float(grid.levels)
        self.meta_arms = [
            MetaArm(self.prob_rows[i], self.level_rows[i], validate=False)
            for i in range(self.level_rows.shape[0])
        ]
        self._row_of = enumeration_index(grid)
        if tie_break not in ("lexicographic", "random"):
            raise ValueError(f"unknown tie_break {tie_break!r}")
        self.tie_break = tie_break

    def _pick(self, scores: np.ndarray) -> int:
        best = int(np.argmax(scores))
        if self.tie_break == "random":
            ties = np.flatnonzero(scores == scores[best])
            if ties.size > 1:
                best = int(self.rng.choice(ties))
        return best

    def _schedule_rows(self) -> list[int]:
        return [
            self._row_of[tuple(int(x) for x in vec)]
            for vec in covering_schedule(self.grid)
        ]


class ActionDependentUCB(_GridIndexPolicy):
    """Round-by-round UCB over the meta-arm grid (Eq.-(5)-style index).

    Warm-up plays a covering schedule so every discretized arm gets one
    importance-weighted sample (zero when the arm did not activate); after
    that each round maximizes
    sqrt(K ln t / min_k n(p_k)) + sum_k p_k rbar(p_k).
    """

    name = "aducb"

    def __init__(self, grid: SimplexGrid, tie_break: str = "lexicographic"):
        super().__init__(grid, tie_break)
        self.stats = DiscretizedStats(grid.K, grid.levels)
        self.schedule = self._schedule_rows()
        self.warmup_rounds = len(self.schedule)

    def ucb_scores(self, t: int) -> np.ndarray:
        log_num = self.grid.K * max(math.log(t), 0.0)
        return kernels.ucb_mincount_scores(
            self.prob_rows,
            self.level_rows,
            self.stats.counts,
            self.stats.sums,
            1.0,
            log_num,
            0.0,
        )

    def select(self, t: int) -> MetaArm:
        if t <= self.warmup_rounds:
            return self.meta_arms[self.schedule[t - 1]]
        return self.meta_arms[self._pick(self.ucb_scores(t))]

    def observe(self, obs) -> None:
        self.stats.add(obs.deployed.levels, iw_rewards(obs))


@dataclass
class PhaseState:
    """Bookkeeping for the phased reduction.

    L rounds per phase, the first s_a approaching and the rest estimating;
    rho is the realized estimation ratio (L - s_a)/L. ``phases_done`` is
    the number of completed phases, warm-up included.
    """

    L: int
    s_a: int
    err: float
    est: DiscretizedStats
    phases_done: int = 0
    current_row: int = -1

    def __post_init__(self):
        if not 1 <= self.s_a < self.L:
            raise ValueError(
                f"need 1 <= s_a < L for a nonempty estimation stage, "
                f"got s_a={self.s_a}, L={self.L}"
            )

    @property
    def rho(self) -> float:
        return (self.L - self.s_a) / self.L

    @property
    def estimation_rounds(self) -> int:
        return self.L - self.s_a


class HistoryDependentUCB(_GridIndexPolicy):
    """Phased UCB for nonzero discounts.

    Phase-end score: Ubar_est(p) + err + 3 sqrt(K ln((L - s_a) m) / min n_est)
    with m the number of completed phases. The log argument follows the
    analysis (grows with m); ``phase_log=False`` freezes it at L - s_a.
    Warm-up runs one full phase per covering meta arm.
    """

    name = "hducb"

    def __init__(
        self,
        grid: SimplexGrid,
        gamma: float,
        s_a: int,
        L: int | None = None,
        rho: float = 0.2,
        lipschitz_star: float = 1.0,
        phase_log: bool = True,
        tie_break: str = "lexicographic",
    ):
        super().__init__(grid, tie_break)
        if L is None:
            L = math.ceil(s_a / (1.0 - rho))
        self.gamma = gamma
        self.phase_log = phase_log
        self.phase = PhaseState(
            L=L,
            s_a=s_a,
            err=bias_allowance(grid.K, gamma, s_a, lipschitz_star),
            est=DiscretizedStats(grid.K, grid.levels),
        )
        self.schedule = self._schedule_rows()
        self.warmup_rounds = len(self.schedule) * L

    def phase_scores(self) -> np.ndarray:
        m = max(self.phase.phases_done, 1)
        inner = self.phase.estimation_rounds * (m if self.phase_log else 1)
        log_num = self.grid.K * max(math.log(inner), 0.0)
        return kernels.ucb_mincount_scores(
            self.prob_rows,
            self.level_rows,
            self.phase.est.counts,
            self.phase.est.sums,
            3.0,
            log_num,
            self.phase.err,
        )

    def select(self, t: int) -> MetaArm:
        L = self.phase.L
        if (t - 1) % L == 0:
            phase_index = (t - 1) // L
            if phase_index < len(self.schedule):
                self.phase.current_row = self.schedule[phase_index]
            else:
                self.phase.current_row = self._pick(self.phase_scores())
        return self.meta_arms[self.phase.current_row]

    def observe(self, obs) -> None:
        pos = (obs.round - 1) % self.phase.L
        if pos >= self.phase.s_a:
            self.phase.est.add(obs.deployed.levels, iw_rewards(obs))
        if pos == self.phase.L - 1:
            self.phase.phases_done += 1
