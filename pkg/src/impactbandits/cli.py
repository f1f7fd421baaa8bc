"""Command-line front end.

Subcommands: ``run`` (execute a config file and emit regret CSVs),
``enumerate`` (list the meta arms of a grid), ``gen-instance`` (serialize a
reward model), ``negative-demo`` (impact-blind baselines on the two-arm
lock-in instance). Exit codes: 0 success, 1 runtime failure, 2
configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

import numpy as np

from .config import (
    EnvironmentConfig,
    ExperimentConfig,
    build_model,
    parse_config,
    save_model,
)
from .environments import PiecewiseLinearTwoArmModel, make_bump_instance
from .errors import (
    ConfigError,
    EmptyActionSpace,
    InfeasibleInstance,
    InvalidDiscretization,
    InvalidHorizon,
)
from .harness import (
    AggregateCurve,
    derive_seed,
    log_checkpoints,
    replicate,
    resolve_benchmark,
)
from .policies import PolicyContext, build_policy, phase_lengths_for_epsilon, schedule_params
from .simplex import as_unit_fraction, enumerate_meta_arms, make_grid

CSV_HEADER = "policy,gamma,t,mean_regret,std,runs"

#: below this horizon the lock-in demonstration has not had time to bite
DEMO_MIN_HORIZON = 1000

_CONFIG_ERRORS = (
    ConfigError,
    InvalidDiscretization,
    EmptyActionSpace,
    InfeasibleInstance,
    InvalidHorizon,
)


def _g(x: float) -> str:
    """Numeric CSV field: nine significant digits."""
    return format(float(x), ".9g")


def curve_rows(curve: AggregateCurve) -> list[str]:
    rows = []
    for i, t in enumerate(curve.checkpoints):
        rows.append(
            f"{curve.policy},{_g(curve.gamma)},{int(t)},"
            f"{_g(curve.mean[i])},{_g(curve.std[i])},{curve.runs}"
        )
    return rows


def write_curves(curves: list[AggregateCurve], out_dir: str) -> list[str]:
    """One CSV per policy, a combined CSV, and a gnuplot-friendly .dat."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for curve in curves:
        path = os.path.join(out_dir, f"{curve.policy}.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(CSV_HEADER + "\n")
            fh.write("\n".join(curve_rows(curve)) + "\n")
        written.append(path)
    combined = os.path.join(out_dir, "combined.csv")
    with open(combined, "w", encoding="utf-8") as fh:
        fh.write(CSV_HEADER + "\n")
        for curve in curves:
            fh.write("\n".join(curve_rows(curve)) + "\n")
    written.append(combined)
    dat = os.path.join(out_dir, "combined.dat")
    with open(dat, "w", encoding="utf-8") as fh:
        fh.write("# t  mean_regret  std\n")
        for i, curve in enumerate(curves):
            if i:
                fh.write("\n\n")
            fh.write(f"# policy={curve.policy} gamma={_g(curve.gamma)}\n")
            for j, t in enumerate(curve.checkpoints):
                fh.write(f"{int(t)} {_g(curve.mean[j])} {_g(curve.std[j])}\n")
    written.append(dat)
    return written


def _experiment_curves(cfg: ExperimentConfig, jobs: int) -> list[AggregateCurve]:
    model = build_model(cfg.environment)
    gamma = cfg.environment.gamma
    K = model.K
    if cfg.epsilon == "auto":
        eps, s_a, L = schedule_params(cfg.horizon, K, gamma, cfg.rho)
    else:
        eps = Fraction(1, as_unit_fraction(cfg.epsilon))
        s_a, L = phase_lengths_for_epsilon(eps, K, gamma, cfg.rho)
    grid = make_grid(K, eps)
    if not grid.feasible:
        raise ConfigError(
            f"infeasible grid: K*epsilon = {K}/{grid.levels} > 1"
        )
    ctx = PolicyContext(
        K=K,
        horizon=cfg.horizon,
        gamma=gamma,
        grid=grid,
        rho=cfg.rho,
        lipschitz_star=model.lipschitz_star,
        default_s_a=s_a,
        default_L=L,
    )
    # Validate every policy before any simulation work starts.
    for entry in cfg.policies:
        build_policy(entry.kind, dict(entry.params), ctx)
    benchmark = resolve_benchmark(model, grid)
    checkpoints = log_checkpoints(cfg.horizon, cfg.checkpoints)
    seeds = [derive_seed(cfg.master_seed, i) for i in range(cfg.runs)]
    curves = []
    for entry in cfg.policies:
        curves.append(
            replicate(
                model,
                gamma,
                (entry.kind, entry.params),
                cfg.horizon,
                seeds,
                grid=grid,
                checkpoints=checkpoints,
                jobs=jobs,
                benchmark_utility=benchmark,
                policy_label=entry.label,
            )
        )
    return curves


def cmd_run(args) -> int:
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg.master_seed = args.seed
    out_dir = args.out or cfg.output
    curves = _experiment_curves(cfg, args.jobs)
    for path in write_curves(curves, out_dir):
        print(path)
    return 0


def cmd_enumerate(args) -> int:
    grid = make_grid(args.arms, args.epsilon)
    arms = enumerate_meta_arms(grid)
    for arm in arms:
        print(" ".join(_g(p) for p in arm.probs))
    print(f"count={len(arms)} (K={grid.K}, epsilon=1/{grid.levels})")
    return 0


def cmd_gen_instance(args) -> int:
    kind = args.kind
    if kind == "gaussian":
        env = EnvironmentConfig(
            kind="scaled_gaussian",
            arms=args.arms,
            gamma=0.0,
            params={"instance_seed": str(args.seed)},
        )
        model = build_model(env)
    elif kind == "example1":
        if args.arms != 2:
            raise ConfigError("example1 is a two-arm instance")
        model = PiecewiseLinearTwoArmModel(args.epsilon_inst)
    elif kind == "bump":
        rng = np.random.default_rng(args.seed)
        model = make_bump_instance(args.arms, args.epsilon_bump, rng)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown instance kind {kind!r}")
    save_model(model, args.out)
    print(args.out)
    return 0


def cmd_negative_demo(args) -> int:
    """Impact-blind baselines locking in on the piecewise-linear instance."""
    T = args.horizon
    model = PiecewiseLinearTwoArmModel(args.epsilon_inst)
    eps, s_a, L = schedule_params(max(T, 2), 2, 0.0, 0.2)
    grid = make_grid(2, eps)
    benchmark = resolve_benchmark(model, grid)
    checkpoints = np.unique(
        np.concatenate([log_checkpoints(T), [max(1, T // 2), T]])
    )
    seeds = [derive_seed(args.seed, i) for i in range(args.runs)]
    curves = []
    for name in ("ts", "ucb1", "aducb"):
        curves.append(
            replicate(
                model,
                0.0,
                (name, {}),
                T,
                seeds,
                grid=grid,
                checkpoints=checkpoints,
                jobs=args.jobs,
                benchmark_utility=benchmark,
            )
        )
    out_dir = args.out
    write_curves(curves, out_dir)
    half_idx = int(np.searchsorted(checkpoints, max(1, T // 2)))
    last_idx = len(checkpoints) - 1
    for curve in curves:
        final_rate = curve.mean[last_idx] / T
        span = T - checkpoints[half_idx]
        late = (
            (curve.mean[last_idx] - curve.mean[half_idx]) / span if span > 0 else 0.0
        )
        print(
            f"policy={curve.policy} final_regret_per_round={_g(final_rate)} "
            f"late_window_per_round={_g(late)}"
        )
    if T < DEMO_MIN_HORIZON:
        print(
            f"note: horizon {T} too short for asymptotic claim "
            f"(need >= {DEMO_MIN_HORIZON})"
        )
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="impactbandits",
        description="Bandit simulations with history-dependent arm rewards.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("--config", required=True, help="experiment config file")
    p_run.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p_run.add_argument("--out", default=None, help="output directory override")
    p_run.add_argument("--seed", type=int, default=None, help="master seed override")
    p_run.set_defaults(func=cmd_run)

    p_enum = sub.add_parser("enumerate", help="list grid meta arms")
    p_enum.add_argument("--arms", type=int, required=True)
    p_enum.add_argument("--epsilon", required=True, help="grid step, e.g. 1/4")
    p_enum.set_defaults(func=cmd_enumerate)

    p_gen = sub.add_parser("gen-instance", help="serialize a reward model")
    p_gen.add_argument(
        "--kind", required=True, choices=("gaussian", "example1", "bump")
    )
    p_gen.add_argument("--arms", type=int, default=2)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True, help="model file to write")
    p_gen.add_argument("--epsilon-inst", type=float, default=0.2)
    p_gen.add_argument("--epsilon-bump", default="1/4")
    p_gen.set_defaults(func=cmd_gen_instance)

    p_neg = sub.add_parser(
        "negative-demo", help="impact-blind baselines on the lock-in instance"
    )
    p_neg.add_argument("--horizon", type=int, required=True)
    p_neg.add_argument("--epsilon-inst", type=float, default=0.2)
    p_neg.add_argument("--seed", type=int, default=0)
    p_neg.add_argument("--runs", type=int, default=20)
    p_neg.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p_neg.add_argument("--out", default="negative-demo")
    p_neg.set_defaults(func=cmd_negative_demo)

    return parser


def main(argv=None) -> int:
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
