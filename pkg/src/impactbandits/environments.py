"""Reward environments whose arm means depend on the deployed-strategy history.

The per-arm impact value f_k(t) is the discount-weighted average of the
probabilities assigned to arm k so far; arm k's reward at round t is
Bernoulli with mean r_k(f_k(t)). With discount 0 the impact collapses to
the current strategy and the environment is purely action dependent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleInstance
from .simplex import MetaArm, as_unit_fraction

#: Lipschitz constant of exp(-(x - tau)^2): max |r'| = sqrt(2) * exp(-1/2).
GAUSSIAN_LIPSCHITZ = math.sqrt(2.0) * math.exp(-0.5)


@dataclass(frozen=True)
class ImpactState:
    """Per-arm discounted frequency accumulator.

    numerators[k] = sum_{s<=t} p_k(s) gamma^(t-s); the shared denominator
    (1 - gamma^t)/(1 - gamma) is kept in closed form to avoid drift. With
    gamma = 0 the denominator is 1 for every t >= 1 (0^0 = 1 convention).
    """

    gamma: float
    numerators: np.ndarray
    t: int = 0

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"discount must lie in [0, 1), got {self.gamma}")
        self.numerators.flags.writeable = False

    @property
    def K(self) -> int:
        return self.numerators.shape[0]

    @property
    def denominator(self) -> float:
        if self.t == 0:
            return 0.0
        if self.gamma == 0.0:
            return 1.0
        return (1.0 - self.gamma**self.t) / (1.0 - self.gamma)

    def frequencies(self) -> np.ndarray:
        if self.t == 0:
            raise ValueError("impact undefined before the first update")
        return self.numerators / self.denominator


def initial_impact_state(K: int, gamma: float) -> ImpactState:
    return ImpactState(gamma=gamma, numerators=np.zeros(K), t=0)


def impact_update(state: ImpactState, deployed: MetaArm) -> ImpactState:
    """Fold one deployed strategy into the discounted history."""
    if deployed.K != state.K:
        raise ValueError(f"strategy has {deployed.K} arms, state has {state.K}")
    return ImpactState(
        gamma=state.gamma,
        numerators=deployed.probs + state.gamma * state.numerators,
        t=state.t + 1,
    )


class RewardModel:
    """Mean-reward curves r_k: [0,1] -> [0,1] with known Lipschitz constants."""

    kind = "abstract"

    def __init__(self, lipschitz):
        self.lipschitz = np.asarray(lipschitz, dtype=np.float64)
        self.lipschitz.flags.writeable = False

    @property
    def K(self) -> int:
        return self.lipschitz.shape[0]

    @property
    def lipschitz_star(self) -> float:
        return float(self.lipschitz.max())

    def means(self, x: np.ndarray) -> np.ndarray:
        """r_k(x[k]) for all arms at once. Hot path: no input validation."""
        raise NotImplementedError

    def mean_curve(self, arm: int, xs: np.ndarray) -> np.ndarray:
        """r_arm evaluated on an array of inputs."""
        raise NotImplementedError

    def mean(self, arm: int, x: float) -> float:
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"impact value {x} outside [0, 1]")
        return float(self.mean_curve(arm, np.asarray([x]))[0])

    def params(self) -> dict[str, str]:
        raise NotImplementedError


class ScaledGaussianModel(RewardModel):
    """r_k(x) = exp(-(x - tau_k)^2): a Gaussian density scaled to peak at 1."""

    kind = "scaled_gaussian"

    def __init__(self, taus):
        self.taus = np.asarray(taus, dtype=np.float64)
        self.taus.flags.writeable = False
        super().__init__(np.full(self.taus.shape[0], GAUSSIAN_LIPSCHITZ))

    def means(self, x):
        return np.exp(-((x - self.taus) ** 2))

    def mean_curve(self, arm, xs):
        return np.exp(-((np.asarray(xs, dtype=np.float64) - self.taus[arm]) ** 2))

    def params(self):
        return {"taus": ",".join(repr(float(t)) for t in self.taus)}


class PiecewiseLinearTwoArmModel(RewardModel):
    """The two-arm instance on which mean-tracking algorithms lock in badly.

    r_1 climbs to 1 at x = 1 - eps then falls with slope -1; r_2 climbs to
    0.5 at x = eps then falls with slope -1/2. The best fixed strategy is
    (1 - eps, eps). The slopes 1/(1-eps) and 1/(2 eps) exceed 1, which is
    the point: the instance deliberately breaks the usual Lipschitz range.
    """

    kind = "example1"

    def __init__(self, eps_inst: float):
        if not 0.0 < eps_inst < 0.5:
            raise ValueError(f"instance parameter must lie in (0, 1/2), got {eps_inst}")
        self.eps_inst = float(eps_inst)
        super().__init__([1.0 / (1.0 - eps_inst), 1.0 / (2.0 * eps_inst)])

    def means(self, x):
        e = self.eps_inst
        r1 = np.where(x[0] <= 1.0 - e, x[0] / (1.0 - e), 2.0 - e - x[0])
        r2 = np.where(x[1] <= e, x[1] / (2.0 * e), -0.5 * x[1] + 0.5 * (1.0 + e))
        return np.array([r1, r2])

    def mean_curve(self, arm, xs):
        xs = np.asarray(xs, dtype=np.float64)
        e = self.eps_inst
        if arm == 0:
            return np.where(xs <= 1.0 - e, xs / (1.0 - e), 2.0 - e - xs)
        return np.where(xs <= e, xs / (2.0 * e), -0.5 * xs + 0.5 * (1.0 + e))

    def params(self):
        return {"epsilon_inst": repr(self.eps_inst)}


class BumpModel(RewardModel):
    """Flat 1/2 landscape with one Lipschitz bump of height eps per arm."""

    kind = "bump"

    def __init__(self, pstars, eps_bump: float, lipschitz=None):
        self.pstars = np.asarray(pstars, dtype=np.float64)
        self.pstars.flags.writeable = False
        if not 0.0 < eps_bump <= 0.5:
            raise ValueError(f"bump height must lie in (0, 1/2], got {eps_bump}")
        self.eps_bump = float(eps_bump)
        if lipschitz is None:
            lipschitz = np.ones(self.pstars.shape[0])
        super().__init__(lipschitz)

    def means(self, x):
        gap = self.eps_bump - self.lipschitz * np.abs(x - self.pstars)
        return 0.5 + np.maximum(0.0, gap)

    def mean_curve(self, arm, xs):
        xs = np.asarray(xs, dtype=np.float64)
        gap = self.eps_bump - self.lipschitz[arm] * np.abs(xs - self.pstars[arm])
        return 0.5 + np.maximum(0.0, gap)

    def params(self):
        return {
            "pstars": ",".join(repr(float(p)) for p in self.pstars),
            "epsilon_bump": repr(float(self.eps_bump)),
            "lipschitz": ",".join(repr(float(l)) for l in self.lipschitz),
        }


class TableModel(RewardModel):
    """Piecewise-linear interpolation through per-arm (input, mean) tables."""

    kind = "table"

    def __init__(self, tables):
        self.tables = []
        lipschitz = []
        for xs, ys in tables:
            xs = np.asarray(xs, dtype=np.float64)
            ys = np.asarray(ys, dtype=np.float64)
            if xs.shape != ys.shape or xs.size < 2:
                raise ValueError("each table needs matched x/y arrays of length >= 2")
            if np.any(np.diff(xs) <= 0):
                raise ValueError("table inputs must be strictly increasing")
            if xs[0] != 0.0 or xs[-1] != 1.0:
                raise ValueError("tables must span [0, 1]")
            if np.any((ys < 0.0) | (ys > 1.0)):
                raise ValueError("table means must lie in [0, 1]")
            self.tables.append((xs, ys))
            lipschitz.append(float(np.max(np.abs(np.diff(ys) / np.diff(xs)))))
        super().__init__(lipschitz)

    def means(self, x):
        return np.array(
            [np.interp(x[k], xs, ys) for k, (xs, ys) in enumerate(self.tables)]
        )

    def mean_curve(self, arm, xs):
        tx, ty = self.tables[arm]
        return np.interp(np.asarray(xs, dtype=np.float64), tx, ty)

    def params(self):
        rows = {}
        for k, (xs, ys) in enumerate(self.tables):
            rows[f"points_{k}"] = ";".join(
                f"{float(x)!r}:{float(y)!r}" for x, y in zip(xs, ys)
            )
        return rows


def make_bump_instance(K: int, epsilon_bump, rng: np.random.Generator) -> BumpModel:
    """Sample a hidden-optimum placement for the hard instance family.

    Each arm's optimum sits at an odd multiple (2j-1)*eps and the optima sum
    to one; the placement is drawn uniformly from all such compositions.
    Unit Lipschitz constants throughout.
    """
    if K < 2:
        raise ValueError("bump instances need at least two arms")
    n_e = as_unit_fraction(epsilon_bump)
    eps = 1.0 / n_e
    # sum_k (2 j_k - 1) = n_e  <=>  sum_k j_k = (n_e + K) / 2 with j_k >= 1
    # and (2 j_k - 1) eps <= 1.
    if (n_e + K) % 2 != 0:
        raise InfeasibleInstance(
            f"no odd-multiple composition of 1 exists for K={K}, eps=1/{n_e}"
        )
    target = (n_e + K) // 2
    j_max = (n_e + 1) // 2
    choices: list[tuple[int, ...]] = []

    def extend(prefix: list[int], remaining: int, arms_left: int):
        if arms_left == 1:
            if 1 <= remaining <= j_max:
                choices.append(tuple(prefix + [remaining]))
            return
        lo = max(1, remaining - j_max * (arms_left - 1))
        hi = min(j_max, remaining - (arms_left - 1))
        for j in range(lo, hi + 1):
            extend(prefix + [j], remaining - j, arms_left - 1)

    extend([], target, K)
    if not choices:
        raise InfeasibleInstance(
            f"no odd-multiple composition of 1 exists for K={K}, eps=1/{n_e}"
        )
    pick = choices[int(rng.integers(len(choices)))]
    pstars = np.array([(2 * j - 1) * eps for j in pick])
    return BumpModel(pstars=pstars, eps_bump=eps)


@dataclass(frozen=True)
class Observation:
    """Everything a policy is allowed to see about one round."""

    round: int
    deployed: MetaArm
    activated: np.ndarray  # bool (K,)
    rewards: np.ndarray  # float (K,); meaningful only where activated, else 0
    impact: np.ndarray = field(repr=False)  # f_k(t) at reward time


def _draw(model, f, deployed, activation_rng, reward_rng, round_index):
    probs = deployed.probs
    activated = activation_rng.random(probs.shape[0]) < probs
    rewards = np.zeros(probs.shape[0])
    n_act = int(activated.sum())
    if n_act:
        means = model.means(f)
        rewards[activated] = (
            reward_rng.random(n_act) < means[activated]
        ).astype(np.float64)
    return Observation(
        round=round_index,
        deployed=deployed,
        activated=activated,
        rewards=rewards,
        impact=f,
    )


def env_step(
    model: RewardModel,
    state: ImpactState,
    deployed: MetaArm,
    activation_rng: np.random.Generator,
    reward_rng: np.random.Generator,
) -> tuple[Observation, ImpactState]:
    """Advance the history environment by one round.

    The deployed strategy is folded into the impact state *before* rewards
    are drawn, so round-t rewards use an f(t) that already includes p(t);
    with discount 0 this reduces exactly to f(t) = p(t).
    """
    state = impact_update(state, deployed)
    f = state.frequencies()
    obs = _draw(model, f, deployed, activation_rng, reward_rng, state.t)
    return obs, state


def action_step(
    model: RewardModel,
    deployed: MetaArm,
    round_index: int,
    activation_rng: np.random.Generator,
    reward_rng: np.random.Generator,
) -> Observation:
    """One round of the purely action-dependent environment (f = p).

    Kept as an independent code path; with matching RNG streams it must
    reproduce env_step with discount 0 observation for observation.
    """
    return _draw(
        model, deployed.probs, deployed, activation_rng, reward_rng, round_index
    )


def instantaneous_utility(
    model: RewardModel, state: ImpactState, deployed: MetaArm
) -> float:
    """Expected one-round utility sum_k p_k r_k(f_k) at the current impact."""
    return float(deployed.probs @ model.means(state.frequencies()))
