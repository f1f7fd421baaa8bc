"""Baseline algorithms: exponential weights on base arms and on meta arms,
combinatorial UCB, two nonstationary UCB variants, Bernoulli Thompson
sampling, plain UCB1, and UCB1 on atomic meta arms.

The deterministic-pull baselines announce a one-hot strategy; Thompson
sampling announces its posterior win-probability estimate, since the
environment's means depend on whatever strategy is actually deployed.
"""

from __future__ import annotations

import math

import numpy as np

from .. import kernels
from ..simplex import MetaArm, SimplexGrid
from .base import Policy


def exp3_rate(n_actions: int, horizon: int) -> float:
    """The anytime-safe exploration rate min(1, sqrt(n ln n / ((e-1) T)))."""
    if n_actions < 2:
        return 0.0
    return min(
        1.0, math.sqrt(n_actions * math.log(n_actions) / ((math.e - 1.0) * horizon))
    )


def _one_hot(K: int) -> list[MetaArm]:
    eye = np.eye(K)
    return [MetaArm(eye[k], validate=False) for k in range(K)]


class Exp3BaseArms(Policy):
    """Exponential weights over base arms, played classically: each round a
    single arm is drawn from the mixed weights and deployed one-hot.

    Because the deployed strategy is what the environment reacts to, the
    one-hot pull evaluates the drawn arm's reward curve at (a discounted
    average of) one-hot inputs; chasing the best fixed *arm* is exactly why
    this baseline cannot track a mixed optimum.
    """

    name = "exp3"

    def __init__(self, K: int, horizon: int, rate: float | None = None):
        super().__init__()
        self.K = K
        self.rate = exp3_rate(K, horizon) if rate is None else rate
        self.weights = np.ones(K)
        self.one_hot = _one_hot(K)
        self._last_arm = -1
        self._last_prob = 1.0

    def current_strategy(self) -> np.ndarray:
        """The sampling distribution the next pull is drawn from."""
        w = self.weights / self.weights.sum()
        return (1.0 - self.rate) * w + self.rate / self.K

    def select(self, t: int) -> MetaArm:
        p = self.current_strategy()
        if self.K == 1:
            self._last_arm, self._last_prob = 0, 1.0
        else:
            self._last_arm = int(self.rng.choice(self.K, p=p))
            self._last_prob = float(p[self._last_arm])
        return self.one_hot[self._last_arm]

    def observe(self, obs) -> None:
        a = self._last_arm
        if not obs.activated[a]:
            return
        xhat = float(obs.rewards[a]) / self._last_prob
        self.weights[a] *= math.exp(self.rate * xhat / self.K)
        self.weights /= self.weights.max()  # rescaling keeps weights finite


class MetaExp3(Policy):
    """Exponential weights treating every grid meta arm as one action.

    Demonstrates the exponential-in-K action-space blowup: the drawn meta
    arm's weight is updated with its observed total reward divided by its
    selection probability.
    """

    name = "mexp3"

    def __init__(self, grid: SimplexGrid, horizon: int, rate: float | None = None):
        super().__init__()
        from ..simplex import enumerate_meta_arms

        self.meta_arms = enumerate_meta_arms(grid)
        self.M = len(self.meta_arms)
        self.rate = exp3_rate(self.M, horizon) if rate is None else rate
        self.weights = np.ones(self.M)
        self._last_row = -1
        self._last_prob = 1.0

    def _distribution(self) -> np.ndarray:
        w = self.weights / self.weights.sum()
        return (1.0 - self.rate) * w + self.rate / self.M

    def select(self, t: int) -> MetaArm:
        q = self._distribution()
        self._last_row = int(self.rng.choice(self.M, p=q))
        self._last_prob = float(q[self._last_row])
        return self.meta_arms[self._last_row]

    def observe(self, obs) -> None:
        total = float(obs.rewards[obs.activated].sum())
        rhat = total / self._last_prob
        self.weights[self._last_row] *= math.exp(self.rate * rhat / self.M)
        self.weights /= self.weights.max()


class CombinatorialUCB(Policy):
    """Semi-bandit UCB on discretized arms with the simplex as its oracle.

    Means come from raw activated rewards (no importance weighting); the
    oracle maximizes sum_k p_k * (rbar(p_k) + sqrt(3 ln t / 2 n(p_k))) over
    the meta-arm grid, with unvisited discretized arms scored +inf.
    """

    name = "cucb"

    def __init__(self, grid: SimplexGrid):
        super().__init__()
        from ..simplex import level_matrix

        self.grid = grid
        self.level_rows = level_matrix(grid)
        self.prob_rows = self.level_rows / float(grid.levels)
        self.meta_arms = [
            MetaArm(self.prob_rows[i], self.level_rows[i], validate=False)
            for i in range(self.level_rows.shape[0])
        ]
        self.counts = np.zeros((grid.K, grid.levels + 1))
        self.sums = np.zeros((grid.K, grid.levels + 1))

    def arm_indices(self, t: int) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            idx = self.sums / self.counts + np.sqrt(
                3.0 * max(math.log(t), 0.0) / (2.0 * self.counts)
            )
        idx[self.counts == 0] = np.inf
        return idx

    def select(self, t: int) -> MetaArm:
        scores = kernels.index_dot_scores(
            self.prob_rows, self.level_rows, self.arm_indices(t)
        )
        return self.meta_arms[int(np.argmax(scores))]

    def observe(self, obs) -> None:
        levels = obs.deployed.levels
        for k in np.flatnonzero(obs.activated):
            self.counts[k, levels[k]] += 1.0
            self.sums[k, levels[k]] += obs.rewards[k]


class DiscountedUCB(Policy):
    """UCB with geometrically discounted counts and reward sums."""

    name = "ducb"

    def __init__(self, K: int, discount: float = 0.8, xi: float = 1.0):
        super().__init__()
        if not 0.0 < discount < 1.0:
            raise ValueError(f"discount must lie in (0, 1), got {discount}")
        self.K = K
        self.discount = discount
        self.xi = xi
        self.n_disc = np.zeros(K)
        self.s_disc = np.zeros(K)
        self.one_hot = _one_hot(K)
        self._last_arm = -1

    def indices(self) -> np.ndarray:
        n_t = self.n_disc.sum()
        log_term = max(math.log(n_t), 0.0) if n_t > 0.0 else 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            idx = self.s_disc / self.n_disc + 2.0 * np.sqrt(
                self.xi * log_term / self.n_disc
            )
        idx[self.n_disc == 0] = np.inf
        return idx

    def select(self, t: int) -> MetaArm:
        self._last_arm = int(np.argmax(self.indices()))
        return self.one_hot[self._last_arm]

    def observe(self, obs) -> None:
        self.n_disc *= self.discount
        self.s_disc *= self.discount
        a = self._last_arm
        if obs.activated[a]:
            self.n_disc[a] += 1.0
            self.s_disc[a] += obs.rewards[a]


class SlidingWindowUCB(Policy):
    """UCB from the last `window` plays only."""

    name = "swucb"

    def __init__(self, K: int, window: int = 200, xi: float = 1.0):
        super().__init__()
        if window < 1:
            raise ValueError(f"window must be positive, got {window}")
        self.K = K
        self.window = window
        self.xi = xi
        self.buf_arm = np.full(window, -1, dtype=np.int64)
        self.buf_rew = np.zeros(window)
        self.pos = 0
        self.n_win = np.zeros(K)
        self.s_win = np.zeros(K)
        self.one_hot = _one_hot(K)
        self._last_arm = -1

    def indices(self, t: int) -> np.ndarray:
        log_term = max(math.log(min(t, self.window)), 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            idx = self.s_win / self.n_win + 2.0 * np.sqrt(
                self.xi * log_term / self.n_win
            )
        idx[self.n_win == 0] = np.inf
        return idx

    def select(self, t: int) -> MetaArm:
        self._last_arm = int(np.argmax(self.indices(t)))
        return self.one_hot[self._last_arm]

    def observe(self, obs) -> None:
        a = self._last_arm
        reward = float(obs.rewards[a]) if obs.activated[a] else 0.0
        old = self.buf_arm[self.pos]
        if old >= 0:
            self.n_win[old] -= 1.0
            self.s_win[old] -= self.buf_rew[self.pos]
        self.buf_arm[self.pos] = a
        self.buf_rew[self.pos] = reward
        self.n_win[a] += 1.0
        self.s_win[a] += reward
        self.pos = (self.pos + 1) % self.window


class ThompsonSampling(Policy):
    """Beta-Bernoulli Thompson sampling, blind to the impact dynamics.

    Pulls argmax of one posterior draw per arm. The announced strategy is
    the empirical frequency of each arm winning across `n_prob_samples`
    extra posterior draws (floored at 1e-6 and renormalized), which is what
    the environment's impact actually responds to.
    """

    name = "ts"

    def __init__(self, K: int, n_prob_samples: int = 10_000):
        super().__init__()
        if n_prob_samples < 1:
            raise ValueError("need at least one posterior sample")
        self.K = K
        self.n_prob_samples = n_prob_samples
        self.successes = np.zeros(K, dtype=np.int64)
        self.failures = np.zeros(K, dtype=np.int64)
        self._last_arm = -1

    def announced_strategy(self) -> np.ndarray:
        n = self.n_prob_samples
        draws = np.empty((self.K, n))
        for k in range(self.K):
            # Scalar-parameter draws hit the fast path in the generator.
            draws[k] = self.rng.beta(
                self.successes[k] + 1.0, self.failures[k] + 1.0, size=n
            )
        wins = np.bincount(np.argmax(draws, axis=0), minlength=self.K)
        freq = np.maximum(wins / n, 1e-6)
        return freq / freq.sum()

    def select(self, t: int) -> MetaArm:
        theta = self.rng.beta(self.successes + 1.0, self.failures + 1.0)
        self._last_arm = int(np.argmax(theta))
        return MetaArm(self.announced_strategy(), validate=False)

    def observe(self, obs) -> None:
        a = self._last_arm
        if obs.activated[a]:
            if obs.rewards[a] >= 1.0:
                self.successes[a] += 1
            else:
                self.failures[a] += 1


class UCB1BaseArms(Policy):
    """Classic UCB1 treating the K base arms as the whole action space."""

    name = "ucb1"

    def __init__(self, K: int):
        super().__init__()
        self.K = K
        self.counts = np.zeros(K)
        self.sums = np.zeros(K)
        self.one_hot = _one_hot(K)
        self._last_arm = -1

    def indices(self, t: int) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            idx = self.sums / self.counts + np.sqrt(
                2.0 * max(math.log(t), 0.0) / self.counts
            )
        idx[self.counts == 0] = np.inf
        return idx

    def select(self, t: int) -> MetaArm:
        self._last_arm = int(np.argmax(self.indices(t)))
        return self.one_hot[self._last_arm]

    def observe(self, obs) -> None:
        a = self._last_arm
        if obs.activated[a]:
            self.counts[a] += 1.0
            self.sums[a] += obs.rewards[a]


class NaiveMetaUCB1(Policy):
    """UCB1 over atomic meta arms: the off-the-shelf reduction whose action
    space grows combinatorially with K."""

    name = "naive_mucb1"

    def __init__(self, grid: SimplexGrid):
        super().__init__()
        from ..simplex import enumerate_meta_arms

        self.meta_arms = enumerate_meta_arms(grid)
        self.M = len(self.meta_arms)
        self.plays = np.zeros(self.M)
        self.totals = np.zeros(self.M)
        self._last_row = -1

    def indices(self, t: int) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            idx = self.totals / self.plays + np.sqrt(
                2.0 * max(math.log(t), 0.0) / self.plays
            )
        idx[self.plays == 0] = np.inf
        return idx

    def select(self, t: int) -> MetaArm:
        self._last_row = int(np.argmax(self.indices(t)))
        return self.meta_arms[self._last_row]

    def observe(self, obs) -> None:
        self.plays[self._last_row] += 1.0
        self.totals[self._last_row] += float(obs.rewards[obs.activated].sum())


class FixedStrategy(Policy):
    """Deploys one strategy forever; the oracle benchmark as a policy."""

    name = "fixed"

    def __init__(self, probs, levels=None):
        super().__init__()
        self.arm = MetaArm(np.asarray(probs, dtype=np.float64), levels)

    def select(self, t: int) -> MetaArm:
        return self.arm

    def observe(self, obs) -> None:
        pass
