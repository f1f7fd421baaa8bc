"""Experiment configuration files and reward-model serialization.

The on-disk format is flat ``key = value`` lines under bracketed section
headers (INI): one ``[experiment]`` block, one ``[environment]`` block, and
one ``[policy <label>]`` block per policy. Reward models round-trip through
the same dialect under a ``[model]`` header.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .environments import (
    BumpModel,
    PiecewiseLinearTwoArmModel,
    RewardModel,
    ScaledGaussianModel,
    TableModel,
    make_bump_instance,
)
from .errors import ConfigError
from .simplex import as_unit_fraction

GAUSSIAN_TAU_RANGE = (0.45, 0.55)


@dataclass
class EnvironmentConfig:
    kind: str
    arms: int
    gamma: float
    params: dict[str, str] = field(default_factory=dict)


@dataclass
class PolicyEntry:
    label: str
    kind: str
    params: dict[str, str] = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    horizon: int
    runs: int
    master_seed: int
    environment: EnvironmentConfig
    policies: list[PolicyEntry]
    epsilon: str = "auto"  # "auto" or a unit fraction like "1/21"
    rho: float = 0.2
    checkpoints: int = 100
    output: str = "results"

    def validate(self) -> None:
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if not 0.0 <= self.environment.gamma < 1.0:
            raise ConfigError(
                f"gamma must lie in [0, 1), got {self.environment.gamma}"
            )
        if not 0.0 < self.rho < 1.0:
            raise ConfigError(f"rho must lie in (0, 1), got {self.rho}")
        if self.environment.arms < 1:
            raise ConfigError(f"arms must be >= 1, got {self.environment.arms}")
        if self.checkpoints < 1:
            raise ConfigError(f"checkpoints must be >= 1, got {self.checkpoints}")
        if self.epsilon != "auto":
            as_unit_fraction(self.epsilon)
        if not self.policies:
            raise ConfigError("config declares no policies")


def _parser() -> configparser.ConfigParser:
    return configparser.ConfigParser(interpolation=None, delimiters=("=",))


def parse_config_text(text: str) -> ExperimentConfig:
    cp = _parser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config: {exc}") from exc
    if "experiment" not in cp or "environment" not in cp:
        raise ConfigError("config needs [experiment] and [environment] sections")

    exp = dict(cp["experiment"])
    env = dict(cp["environment"])

    def take(section: dict, key: str, cast, default=None, required=False):
        if key in section:
            raw = section.pop(key)
            try:
                return cast(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default

    environment = EnvironmentConfig(
        kind=take(env, "kind", str, required=True),
        arms=take(env, "arms", int, required=True),
        gamma=take(env, "gamma", float, 0.0),
        params=dict(env),
    )
    policies = []
    for section in cp.sections():
        if not section.startswith("policy"):
            continue
        label = section[len("policy") :].strip()
        if not label:
            raise ConfigError("policy sections are named like [policy hducb]")
        params = dict(cp[section])
        kind = params.pop("kind", label)
        policies.append(PolicyEntry(label=label, kind=kind, params=params))
    known = {"experiment", "environment"}
    for section in cp.sections():
        if section not in known and not section.startswith("policy"):
            raise ConfigError(f"unknown config section [{section}]")

    cfg = ExperimentConfig(
        horizon=take(exp, "horizon", int, required=True),
        runs=take(exp, "runs", int, 1),
        master_seed=take(exp, "master_seed", int, 0),
        epsilon=take(exp, "epsilon", str, "auto"),
        rho=take(exp, "rho", float, 0.2),
        checkpoints=take(exp, "checkpoints", int, 100),
        output=take(exp, "output", str, "results"),
        environment=environment,
        policies=policies,
    )
    if exp:
        raise ConfigError(
            f"unknown key(s) in [experiment]: {', '.join(sorted(exp))}"
        )
    cfg.validate()
    return cfg


def parse_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def serialize_config(cfg: ExperimentConfig) -> str:
    cp = _parser()
    cp["experiment"] = {
        "horizon": str(cfg.horizon),
        "runs": str(cfg.runs),
        "master_seed": str(cfg.master_seed),
        "epsilon": cfg.epsilon,
        "rho": repr(cfg.rho),
        "checkpoints": str(cfg.checkpoints),
        "output": cfg.output,
    }
    env = {
        "kind": cfg.environment.kind,
        "arms": str(cfg.environment.arms),
        "gamma": repr(cfg.environment.gamma),
    }
    env.update({k: cfg.environment.params[k] for k in sorted(cfg.environment.params)})
    cp["environment"] = env
    for entry in cfg.policies:
        section = f"policy {entry.label}"
        body = {}
        if entry.kind != entry.label:
            body["kind"] = entry.kind
        body.update({k: entry.params[k] for k in sorted(entry.params)})
        cp[section] = body
    out = io.StringIO()
    cp.write(out)
    return out.getvalue()


# --- reward models -----------------------------------------------------------


def _floats(raw: str) -> list[float]:
    return [float(x) for x in str(raw).split(",") if x.strip()]


def build_model(env: EnvironmentConfig) -> RewardModel:
    """Instantiate the reward model an environment config describes."""
    params = dict(env.params)
    if "model_file" in params:
        return load_model(params["model_file"])
    kind = env.kind.strip().lower()
    if kind in ("scaled_gaussian", "gaussian"):
        if "taus" in params:
            taus = _floats(params["taus"])
        elif "instance_seed" in params:
            rng = np.random.default_rng(int(params["instance_seed"]))
            lo, hi = GAUSSIAN_TAU_RANGE
            taus = lo + (hi - lo) * rng.random(env.arms)
        else:
            raise ConfigError("scaled_gaussian needs taus=... or instance_seed=...")
        if len(taus) != env.arms:
            raise ConfigError(f"need {env.arms} taus, got {len(taus)}")
        return ScaledGaussianModel(taus)
    if kind == "example1":
        if env.arms != 2:
            raise ConfigError("example1 is a two-arm instance")
        return PiecewiseLinearTwoArmModel(float(params.get("epsilon_inst", 0.2)))
    if kind == "bump":
        if "pstars" in params:
            pstars = _floats(params["pstars"])
            if len(pstars) != env.arms:
                raise ConfigError(f"need {env.arms} pstars, got {len(pstars)}")
            lipschitz = (
                _floats(params["lipschitz"]) if "lipschitz" in params else None
            )
            eps = params.get("epsilon_bump")
            if eps is None:
                raise ConfigError("bump model needs epsilon_bump=...")
            return BumpModel(pstars, float(Fraction(eps)), lipschitz)
        if "instance_seed" in params:
            rng = np.random.default_rng(int(params["instance_seed"]))
            eps = params.get("epsilon_bump")
            if eps is None:
                raise ConfigError("bump model needs epsilon_bump=...")
            return make_bump_instance(env.arms, eps, rng)
        raise ConfigError("bump needs pstars=... or instance_seed=...")
    if kind == "table":
        tables = []
        for k in range(env.arms):
            key = f"points_{k}"
            if key not in params:
                raise ConfigError(f"table model missing {key}=x:y;x:y;...")
            xs, ys = [], []
            for pair in params[key].split(";"):
                x, y = pair.split(":")
                xs.append(float(x))
                ys.append(float(y))
            tables.append((xs, ys))
        return TableModel(tables)
    raise ConfigError(f"unknown environment kind {env.kind!r}")


def model_to_text(model: RewardModel) -> str:
    cp = _parser()
    body = {"kind": model.kind, "arms": str(model.K)}
    params = model.params()
    body.update({k: params[k] for k in sorted(params)})
    cp["model"] = body
    out = io.StringIO()
    cp.write(out)
    return out.getvalue()


def save_model(model: RewardModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_text(model))


def load_model(path) -> RewardModel:
    cp = _parser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read model file {path}: {exc}") from exc
    if "model" not in cp:
        raise ConfigError(f"model file {path} lacks a [model] section")
    body = dict(cp["model"])
    kind = body.pop("kind", None)
    arms = int(body.pop("arms", 0))
    if kind is None or arms < 1:
        raise ConfigError(f"model file {path} needs kind= and arms=")
    env = EnvironmentConfig(kind=kind, arms=arms, gamma=0.0, params=body)
    return build_model(env)
