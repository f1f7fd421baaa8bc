"""Seeded, replicated experiment execution and pseudo-regret accounting.

Pseudo-regret compares expected utilities computed from the true model
means, so the benchmark side of the comparison is variance free: the
benchmark for horizon T is T * U(p*) with p* the best fixed strategy
(constant deployment pins the discounted frequency at p* exactly).

Seed discipline: one master seed; run i draws its seed through a splitmix64
mix of (master, i); within a run, activation, rewards, and policy
randomness live on separate substreams, so adding policy randomness never
perturbs the environment draws.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .environments import RewardModel, env_step, initial_impact_state
from .errors import ConfigError, SlopeUndefined
from .policies import Policy, PolicyContext, build_policy
from .simplex import SimplexGrid, best_fixed_strategy, default_benchmark_resolution

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

STREAM_ACTIVATION = 0
STREAM_REWARD = 1
STREAM_POLICY = 2


def splitmix64(x: int) -> int:
    """One step of the splitmix64 mixer (public-domain constants)."""
    x = (x + _GOLDEN) & _MASK
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK
    x ^= x >> 31
    return x


def derive_seed(master: int, *path: int) -> int:
    """Deterministic child seed: fold each path index through splitmix64."""
    seed = splitmix64(master & _MASK)
    for index in path:
        seed = splitmix64(seed ^ (((index + 1) * _GOLDEN) & _MASK))
    return seed


def run_streams(seed: int) -> tuple[np.random.Generator, ...]:
    """(activation, reward, policy) generators for one run seed."""
    return tuple(
        np.random.default_rng(derive_seed(seed, stream))
        for stream in (STREAM_ACTIVATION, STREAM_REWARD, STREAM_POLICY)
    )


def log_checkpoints(T: int, count: int = 100, lo: int = 10) -> np.ndarray:
    """count log-spaced round indices in [lo, T], deduplicated."""
    lo = min(lo, T)
    pts = np.logspace(math.log10(lo), math.log10(T), count)
    return np.unique(np.round(pts).astype(np.int64))


@dataclass
class RunRecord:
    """Full per-round log of one episode."""

    seed: int
    policy: str
    gamma: float
    benchmark_utility: float
    utilities: np.ndarray  # expected utility per round, (T,)
    cum_regret: np.ndarray  # pseudo-regret through each round, (T,)
    strategies: np.ndarray  # (T, K) int16 grid levels, or float64 probabilities
    on_grid: bool


@dataclass
class AggregateCurve:
    """Mean/std pseudo-regret at checkpoints across replicated runs."""

    policy: str
    gamma: float
    checkpoints: np.ndarray  # (C,) int
    mean: np.ndarray  # (C,)
    std: np.ndarray  # (C,)
    runs: int
    per_run: np.ndarray  # (R, C)


def resolve_benchmark(
    model: RewardModel, grid: SimplexGrid | None, resolution=None
) -> float:
    """U(p*) from the exhaustive fixed-strategy search."""
    if resolution is None:
        levels = grid.levels if grid is not None else 1
        resolution = default_benchmark_resolution(model.K, levels)
    _, utility = best_fixed_strategy(model, resolution)
    return utility


def run_episode(
    model: RewardModel,
    gamma: float,
    policy,
    T: int,
    seed: int,
    grid: SimplexGrid | None = None,
    benchmark_utility: float | None = None,
    policy_label: str | None = None,
    context: PolicyContext | None = None,
) -> RunRecord:
    """One seeded episode: select -> environment step -> observe, T times.

    ``policy`` is either a Policy instance or a (name, params) pair built
    through the registry. Bit-identical output for identical inputs.
    """
    if isinstance(policy, Policy):
        instance = policy
        label = policy_label or instance.name
    else:
        name, params = policy
        if context is None:
            context = PolicyContext(K=model.K, horizon=T, gamma=gamma, grid=grid)
        instance = build_policy(name, params, context)
        label = policy_label or name
    if T < 1:
        raise ConfigError(f"horizon must be positive, got {T}")
    if T < instance.warmup_rounds:
        raise ConfigError(
            f"horizon {T} is shorter than {label!r} initialization "
            f"({instance.warmup_rounds} rounds)"
        )
    if benchmark_utility is None:
        benchmark_utility = resolve_benchmark(model, grid)

    act_rng, rew_rng, pol_rng = run_streams(seed)
    instance.bind_rng(pol_rng)
    K = model.K
    state = initial_impact_state(K, gamma)
    utilities = np.empty(T)
    levels_log = np.zeros((T, K), dtype=np.int16)
    probs_log: np.ndarray | None = None
    grid_levels = grid.levels if grid is not None else 0

    for t in range(1, T + 1):
        arm = instance.select(t)
        obs, state = env_step(model, state, arm, act_rng, rew_rng)
        instance.observe(obs)
        utilities[t - 1] = float(arm.probs @ model.means(obs.impact))
        if probs_log is None:
            if arm.levels is not None:
                levels_log[t - 1] = arm.levels
            else:
                # First off-grid strategy: fall back to raw probabilities.
                probs_log = np.empty((T, K))
                if t > 1 and grid_levels:
                    probs_log[: t - 1] = levels_log[: t - 1] / float(grid_levels)
                probs_log[t - 1] = arm.probs
        else:
            probs_log[t - 1] = arm.probs

    cum_regret = benchmark_utility * np.arange(1, T + 1) - np.cumsum(utilities)
    on_grid = probs_log is None
    return RunRecord(
        seed=seed,
        policy=label,
        gamma=gamma,
        benchmark_utility=benchmark_utility,
        utilities=utilities,
        cum_regret=cum_regret,
        strategies=levels_log if on_grid else probs_log,
        on_grid=on_grid,
    )


def _replicate_worker(args) -> np.ndarray:
    (model, gamma, name, params, grid, T, seed, benchmark, checkpoints, label) = args
    record = run_episode(
        model,
        gamma,
        (name, dict(params)),
        T,
        seed,
        grid=grid,
        benchmark_utility=benchmark,
        policy_label=label,
    )
    return record.cum_regret[checkpoints - 1]


def replicate(
    model: RewardModel,
    gamma: float,
    policy_spec: tuple[str, dict],
    T: int,
    seeds,
    grid: SimplexGrid | None = None,
    checkpoints: np.ndarray | None = None,
    jobs: int = 1,
    benchmark_utility: float | None = None,
    policy_label: str | None = None,
) -> AggregateCurve:
    """Independent seeded runs aggregated into a mean +- std curve.

    Aggregation is a fold in seed order, so the output is identical no
    matter how many workers executed the runs.
    """
    seeds = list(seeds)
    if not seeds:
        raise ConfigError("replicate needs at least one seed")
    if checkpoints is None:
        checkpoints = log_checkpoints(T)
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    if checkpoints.size == 0 or checkpoints.min() < 1 or checkpoints.max() > T:
        raise ConfigError("checkpoints must lie in [1, T]")
    if benchmark_utility is None:
        benchmark_utility = resolve_benchmark(model, grid)
    name, params = policy_spec
    label = policy_label or name
    tasks = [
        (model, gamma, name, params, grid, T, seed, benchmark_utility, checkpoints, label)
        for seed in seeds
    ]
    if jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_replicate_worker, tasks))
    else:
        rows = [_replicate_worker(task) for task in tasks]
    per_run = np.vstack(rows)
    mean = per_run.mean(axis=0)
    if per_run.shape[0] > 1:
        std = per_run.std(axis=0, ddof=1)
    else:
        std = np.zeros_like(mean)
    return AggregateCurve(
        policy=label,
        gamma=gamma,
        checkpoints=checkpoints,
        mean=mean,
        std=std,
        runs=len(seeds),
        per_run=per_run,
    )


def sublinearity_slope(curve: AggregateCurve, window: float = 0.5) -> float:
    """Least-squares slope of ln(regret) vs ln(t) over the last checkpoints.

    ``window`` is the trailing fraction of checkpoints used for the fit.
    """
    if not 0.0 < window <= 1.0:
        raise ValueError(f"window fraction must lie in (0, 1], got {window}")
    C = curve.checkpoints.shape[0]
    m = max(2, math.ceil(window * C))
    if m > C:
        raise SlopeUndefined(f"need at least 2 checkpoints, have {C}")
    ts = curve.checkpoints[C - m :].astype(np.float64)
    lam = curve.mean[C - m :]
    if np.any(lam <= 0.0):
        raise SlopeUndefined("nonpositive regret inside the fit window")
    slope = np.polyfit(np.log(ts), np.log(lam), 1)[0]
    return float(slope)
