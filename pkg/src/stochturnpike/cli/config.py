"""Experiment configuration: a strict YAML schema and its conversion to problems."""
from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..conic_solver import SolverSettings
from ..pce import Fixed, Normal, Uniform, random_vector
from ..stoch_ocp import (
    Bound,
    ChanceConstraintSpec,
    LinearStochasticSystem,
    NoiseSpec,
    StageCost,
    StochasticOcp,
)

PRESETS = ("motivating", "example1", "example2", "example3")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending location."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class NormalLaw(_Strict):
    law: Literal["normal"]
    mean: float
    variance: float = Field(gt=0)


class UniformLaw(_Strict):
    law: Literal["uniform"]
    lb: float
    ub: float

    @model_validator(mode="after")
    def _order(self):
        if not self.lb < self.ub:
            raise ValueError("uniform law requires lb < ub")
        return self


class FixedLaw(_Strict):
    law: Literal["fixed"]
    value: float


Law = Annotated[Union[NormalLaw, UniformLaw, FixedLaw], Field(discriminator="law")]
NoiseLaw = Annotated[Union[NormalLaw, UniformLaw], Field(discriminator="law")]


class BoundConfig(_Strict):
    lb: float | None = None
    ub: float | None = None
    hard: bool = False

    @model_validator(mode="after")
    def _order(self):
        if self.lb is not None and self.ub is not None and not self.lb < self.ub:
            raise ValueError("bound requires lb < ub")
        return self


class CostConfig(_Strict):
    Qx: list[list[float]] | None = None
    qx: list[float] | None = None
    Ru: list[list[float]] | None = None
    ru: list[float] | None = None
    gamma_x: list[float] | None = None
    gamma_u: list[float] | None = None


class ConstraintConfig(_Strict):
    epsilon_x: float = Field(0.0, ge=0, lt=1)
    epsilon_u: float = Field(0.0, ge=0, lt=1)
    state_bounds: list[BoundConfig | None] = []
    input_bounds: list[BoundConfig | None] = []


class ProblemConfig(_Strict):
    A: list[list[float]]
    B: list[list[float]]
    E: list[list[float]] = []
    cost: CostConfig = CostConfig()
    x0: list[Law]
    noise: list[NoiseLaw] = []
    constraints: ConstraintConfig = ConstraintConfig()
    horizon: int | None = Field(None, ge=1)
    horizons: list[Annotated[int, Field(ge=1)]] = []


class SolverConfig(_Strict):
    max_iter: int = Field(50_000, ge=1)
    eps_primal: float = Field(1e-8, gt=0)
    eps_dual: float = Field(1e-8, gt=0)
    rho: float = Field(0.1, gt=0)
    over_relaxation: float = Field(1.6, gt=0, lt=2)


class AnalysisConfig(_Strict):
    seed: int = Field(0, ge=0)
    samples: int = Field(16, ge=1)
    histogram_samples: int = Field(10_000, ge=1)
    histogram_horizon: int = Field(50, ge=1)
    histogram_times: list[Annotated[int, Field(ge=0)]] = [0, 10, 20, 30, 40, 50]
    stationary_time: int = Field(25, ge=0)
    component: int = Field(0, ge=0)
    eta: float = Field(0.05, gt=0)
    grid_size: int = Field(4096, ge=16)
    bins: int = Field(50, ge=1)
    fixed_noise_horizons: list[Annotated[int, Field(ge=1)]] = []
    x0_draws: int = Field(3, ge=1)


class OutputConfig(_Strict):
    directory: str = "out"
    formats: list[Literal["csv", "svg"]] = ["csv"]


class ExperimentConfig(_Strict):
    name: str = "experiment"
    problem: ProblemConfig
    solver: SolverConfig = SolverConfig()
    analysis: AnalysisConfig = AnalysisConfig()
    output: OutputConfig = OutputConfig()

    # -- conversions --------------------------------------------------------

    def full_horizon(self) -> int:
        p = self.problem
        if p.horizon is not None:
            return p.horizon
        if p.horizons:
            return p.horizons[-1]
        raise ConfigError("problem.horizon: no horizon given (set horizon or horizons)")

    def system(self) -> LinearStochasticSystem:
        p = self.problem
        nx = len(p.A)
        E = np.asarray(p.E, dtype=float) if p.E else np.zeros((nx, 0))
        return LinearStochasticSystem(np.asarray(p.A, float), np.asarray(p.B, float), E)

    def stage_cost(self) -> StageCost:
        s = self.system()
        c = self.problem.cost
        return StageCost.make(s.nx, s.nu, c.Qx, c.qx, c.Ru, c.ru, c.gamma_x, c.gamma_u)

    def chance_constraints(self) -> ChanceConstraintSpec:
        c = self.problem.constraints
        conv = lambda bs: tuple(None if b is None else Bound(b.lb, b.ub, b.hard) for b in bs)
        return ChanceConstraintSpec(conv(c.state_bounds), conv(c.input_bounds), c.epsilon_x, c.epsilon_u)

    def noise_spec(self) -> NoiseSpec:
        return NoiseSpec(tuple(_law(l) for l in self.problem.noise))

    def ocp(self, N: int | None = None) -> StochasticOcp:
        x0 = random_vector([_law(l) for l in self.problem.x0])
        return StochasticOcp(
            self.system(),
            self.stage_cost(),
            self.full_horizon() if N is None else N,
            x0,
            self.noise_spec(),
            self.chance_constraints(),
        )

    def solver_settings(self) -> SolverSettings:
        s = self.solver
        return SolverSettings(max_iter=s.max_iter, eps_primal=s.eps_primal, eps_dual=s.eps_dual,
                              rho=s.rho, over_relaxation=s.over_relaxation)

    def digest(self) -> str:
        blob = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _law(l):
    if isinstance(l, NormalLaw):
        return Normal(l.mean, l.variance)
    if isinstance(l, UniformLaw):
        return Uniform(l.lb, l.ub)
    return Fixed(l.value)


def _format_error(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"])
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


def parse_config(data: dict) -> ExperimentConfig:
    try:
        cfg = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_error(exc)) from None
    try:
        cfg.ocp()
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"problem: {exc}") from None
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return loads_config(text)


def loads_config(text: str) -> ExperimentConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    return parse_config(data)


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.model_dump(mode="json"), sort_keys=False)


def preset_path(name: str):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files(__package__).joinpath("presets", f"{name}.yaml")


def load_preset(name: str) -> ExperimentConfig:
    return loads_config(preset_path(name).read_text())
