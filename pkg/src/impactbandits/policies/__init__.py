"""Decision algorithms and the name -> builder registry used by configs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..errors import ConfigError
from ..simplex import SimplexGrid
from .base import (
    DiscretizedStats,
    Policy,
    covering_schedule,
    enumeration_index,
    iw_reward,
    iw_rewards,
)
from .baselines import (
    CombinatorialUCB,
    DiscountedUCB,
    Exp3BaseArms,
    FixedStrategy,
    MetaExp3,
    NaiveMetaUCB1,
    SlidingWindowUCB,
    ThompsonSampling,
    UCB1BaseArms,
    exp3_rate,
)
from .ucb import (
    ActionDependentUCB,
    HistoryDependentUCB,
    PhaseState,
    bias_allowance,
    phase_lengths_for_epsilon,
    schedule_params,
)

__all__ = [
    "ActionDependentUCB",
    "CombinatorialUCB",
    "DiscountedUCB",
    "DiscretizedStats",
    "Exp3BaseArms",
    "FixedStrategy",
    "HistoryDependentUCB",
    "MetaExp3",
    "NaiveMetaUCB1",
    "PhaseState",
    "Policy",
    "PolicyContext",
    "SlidingWindowUCB",
    "ThompsonSampling",
    "UCB1BaseArms",
    "bias_allowance",
    "build_policy",
    "covering_schedule",
    "enumeration_index",
    "exp3_rate",
    "iw_reward",
    "iw_rewards",
    "phase_lengths_for_epsilon",
    "schedule_params",
]


@dataclass(frozen=True)
class PolicyContext:
    """Run-level facts every policy builder may need."""

    K: int
    horizon: int
    gamma: float
    grid: SimplexGrid | None = None
    rho: float = 0.2
    lipschitz_star: float = 1.0
    default_s_a: int = 1
    default_L: int | None = None


def _need_grid(ctx: PolicyContext, name: str) -> SimplexGrid:
    if ctx.grid is None:
        raise ConfigError(f"policy {name!r} needs a discretization grid")
    return ctx.grid


def _pop(params: dict, key: str, cast, default):
    if key in params:
        return cast(params.pop(key))
    return default


def _pop_bool(params: dict, key: str, default: bool) -> bool:
    if key not in params:
        return default
    raw = str(params.pop(key)).strip().lower()
    if raw in ("1", "true", "yes", "on"):
        return True
    if raw in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"cannot parse boolean {key}={raw!r}")


def _build_aducb(params, ctx):
    return ActionDependentUCB(
        _need_grid(ctx, "aducb"),
        tie_break=_pop(params, "tie_break", str, "lexicographic"),
    )


def _build_hducb(params, ctx):
    rho = _pop(params, "rho", float, ctx.rho)
    s_a = _pop(params, "s_a", int, None)
    L = _pop(params, "L", int, None)
    if s_a is None:
        s_a = ctx.default_s_a
        if L is None:
            L = ctx.default_L
    return HistoryDependentUCB(
        _need_grid(ctx, "hducb"),
        gamma=ctx.gamma,
        s_a=s_a,
        L=L,
        rho=rho,
        lipschitz_star=_pop(params, "lipschitz_star", float, ctx.lipschitz_star),
        phase_log=_pop_bool(params, "phase_log", True),
        tie_break=_pop(params, "tie_break", str, "lexicographic"),
    )


def _build_exp3(params, ctx):
    return Exp3BaseArms(ctx.K, ctx.horizon, rate=_pop(params, "rate", float, None))


def _build_mexp3(params, ctx):
    return MetaExp3(
        _need_grid(ctx, "mexp3"), ctx.horizon, rate=_pop(params, "rate", float, None)
    )


def _build_cucb(params, ctx):
    return CombinatorialUCB(_need_grid(ctx, "cucb"))


def _build_ducb(params, ctx):
    return DiscountedUCB(
        ctx.K,
        discount=_pop(params, "discount", float, 0.8),
        xi=_pop(params, "xi", float, 1.0),
    )


def _build_swucb(params, ctx):
    return SlidingWindowUCB(
        ctx.K,
        window=_pop(params, "window", int, 200),
        xi=_pop(params, "xi", float, 1.0),
    )


def _build_ts(params, ctx):
    return ThompsonSampling(
        ctx.K, n_prob_samples=_pop(params, "n_prob_samples", int, 10_000)
    )


def _build_ucb1(params, ctx):
    return UCB1BaseArms(ctx.K)


def _build_naive(params, ctx):
    return NaiveMetaUCB1(_need_grid(ctx, "naive_mucb1"))


def _build_fixed(params, ctx):
    if "probs" not in params:
        raise ConfigError("policy 'fixed' needs a probs=<p1,p2,...> parameter")
    probs = [float(x) for x in str(params.pop("probs")).split(",")]
    if len(probs) != ctx.K:
        raise ConfigError(f"fixed strategy has {len(probs)} entries, need {ctx.K}")
    return FixedStrategy(probs)


_REGISTRY: dict[str, Callable[[dict, PolicyContext], Policy]] = {
    "aducb": _build_aducb,
    "adubc": _build_aducb,  # common transposition
    "hducb": _build_hducb,
    "exp3": _build_exp3,
    "mexp3": _build_mexp3,
    "cucb": _build_cucb,
    "ducb": _build_ducb,
    "swucb": _build_swucb,
    "ts": _build_ts,
    "ucb1": _build_ucb1,
    "naive_mucb1": _build_naive,
    "fixed": _build_fixed,
}


def policy_names() -> list[str]:
    return sorted(_REGISTRY)


def build_policy(name: str, params: dict, ctx: PolicyContext) -> Policy:
    """Instantiate a registered policy, rejecting unknown names and keys."""
    key = name.strip().lower()
    if key not in _REGISTRY:
        raise ConfigError(
            f"unknown policy {name!r}; known: {', '.join(policy_names())}"
        )
    leftover = dict(params)
    policy = _REGISTRY[key](leftover, ctx)
    if leftover:
        raise ConfigError(
            f"policy {name!r} got unknown parameter(s): {', '.join(sorted(leftover))}"
        )
    return policy
