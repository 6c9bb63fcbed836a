"""Experiment configuration: JSON with a schema version; unknown keys are errors."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .dynamics import MODELS, DisturbanceSpec, GainSchedule, schedule_from_dict
from .integrator import IntegratorConfig
from .presets import EXAMPLE1_INITIAL, EXAMPLE1_PARAMS, PRESETS, get_preset
from .problem import MviProblem
from .prox import prox_from_dict

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    problem: object  # preset name or inline mapping
    model: str
    schedule: dict
    exponents: tuple
    initial_conditions: list
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    disturbance: DisturbanceSpec = field(default_factory=DisturbanceSpec)
    deadzone: float = 1e-9
    output_dir: str = "out"
    seed: int = 0
    probe_samples: int = 10_000
    probe_radius: float = 10.0

    def build_problem(self) -> MviProblem:
        return problem_from_spec(self.problem)

    def build_schedule(self) -> GainSchedule:
        return GainSchedule(self.schedule["gamma1"], self.schedule["gamma2"],
                            self.schedule["gamma3"], self.exponents[0], self.exponents[1],
                            self.deadzone)

    def to_dict(self) -> dict:
        integ = self.integrator
        return {
            "schema_version": SCHEMA_VERSION,
            "problem": self.problem,
            "model": self.model,
            "schedule": {k: v.to_dict() for k, v in self.schedule.items()},
            "exponents": list(self.exponents),
            "deadzone": self.deadzone,
            "disturbance": self.disturbance.to_dict(),
            "integrator": {
                "method": integ.method, "dt": integ.dt, "t_end": integ.t_end,
                "stop_residual": integ.stop_residual, "max_steps": integ.max_steps,
                "record_stride": integ.record_stride,
            },
            "initial_conditions": [list(map(float, x)) for x in self.initial_conditions],
            "output_dir": self.output_dir,
            "seed": self.seed,
            "probe_samples": self.probe_samples,
            "probe_radius": self.probe_radius,
        }


def problem_from_spec(spec) -> MviProblem:
    if isinstance(spec, str):
        return get_preset(spec)
    keys = {"kind", "matrix", "offset", "prox", "mu", "zeta", "lipschitz", "known_solution"}
    extra = set(spec) - keys
    if extra:
        raise ConfigError(f"problem: unknown keys {sorted(extra)}")
    if spec.get("kind") != "affine":
        raise ConfigError("problem: inline problems must have kind 'affine'")
    A = np.asarray(spec["matrix"], dtype=float)
    b = np.asarray(spec.get("offset", np.zeros(A.shape[0])), dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or b.shape != (A.shape[0],):
        raise ConfigError("problem: matrix must be square and offset must match it")
    psi = prox_from_dict(spec.get("prox", {"kind": "zero"}))
    return MviProblem(A.shape[0], lambda w: A @ w + b, psi, float(spec.get("mu", 1.0)),
                      spec.get("zeta"), spec.get("lipschitz"), spec.get("known_solution"),
                      name="affine")


_TOP_KEYS = {"schema_version", "problem", "model", "schedule", "exponents", "deadzone",
             "disturbance", "integrator", "initial_conditions", "output_dir", "seed",
             "probe_samples", "probe_radius"}
_INTEGRATOR_KEYS = {"method", "dt", "t_end", "stop_residual", "max_steps", "record_stride"}


def _field(path: str, fn, *args):
    try:
        return fn(*args)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def parse_config(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    extra = set(data) - _TOP_KEYS
    if extra:
        raise ConfigError(f"unknown keys: {sorted(extra)}")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: expected {SCHEMA_VERSION}, got {data.get('schema_version')!r}")
    for key in ("problem", "model", "schedule", "exponents", "initial_conditions"):
        if key not in data:
            raise ConfigError(f"{key}: missing required field")

    problem = data["problem"]
    if isinstance(problem, str) and problem not in PRESETS:
        raise ConfigError(f"problem: unknown preset {problem!r}; expected one of {sorted(PRESETS)}")
    prob = _field("problem", problem_from_spec, problem)

    model = data["model"]
    if model not in MODELS:
        raise ConfigError(f"model: expected one of {MODELS}, got {model!r}")

    sched = data["schedule"]
    if not isinstance(sched, dict) or set(sched) != {"gamma1", "gamma2", "gamma3"}:
        raise ConfigError("schedule: needs exactly the keys gamma1, gamma2, gamma3")
    schedule = {k: _field(f"schedule.{k}", schedule_from_dict, v) for k, v in sched.items()}

    exps = data["exponents"]
    if not isinstance(exps, (list, tuple)) or len(exps) != 2:
        raise ConfigError("exponents: expected [rho1, rho2]")
    rho1, rho2 = float(exps[0]), float(exps[1])
    if not 0.0 < rho1 < 1.0:
        raise ConfigError(f"exponents[0]: rho1 must lie in (0, 1), got {rho1}")
    if not rho2 > 1.0:
        raise ConfigError(f"exponents[1]: rho2 must exceed 1, got {rho2}")

    ics = data["initial_conditions"]
    if not isinstance(ics, list) or not ics:
        raise ConfigError("initial_conditions: at least one initial condition is required")
    for i, x in enumerate(ics):
        if not isinstance(x, list) or len(x) != prob.dim:
            raise ConfigError(f"initial_conditions[{i}]: expected a list of {prob.dim} numbers")

    integ = data.get("integrator", {})
    extra = set(integ) - _INTEGRATOR_KEYS
    if extra:
        raise ConfigError(f"integrator: unknown keys {sorted(extra)}")
    integrator = _field("integrator", lambda: IntegratorConfig(**integ))

    deadzone = float(data.get("deadzone", 1e-9))
    if not deadzone > 0:
        raise ConfigError("deadzone: must be positive")
    if integrator.stop_residual < deadzone:
        raise ConfigError("integrator.stop_residual: must not be below the dead-zone radius")

    disturbance = _field("disturbance", DisturbanceSpec.from_dict, data.get("disturbance", {"kind": "none"}))
    if disturbance.kind != "none" and prob.known_solution is None:
        raise ConfigError("disturbance: needs a problem with a known solution")
    if model == "pdm":
        if not prob.psi.is_indicator:
            raise ConfigError("model: 'pdm' needs an indicator psi")
        if not all(s.tag == "constant" and s.beta > 0 for s in schedule.values()):
            raise ConfigError("schedule: 'pdm' needs positive constant schedules")

    cfg = ExperimentConfig(problem, model, schedule, (rho1, rho2), ics, integrator, disturbance,
                           deadzone, str(data.get("output_dir", "out")), int(data.get("seed", 0)),
                           int(data.get("probe_samples", 10_000)),
                           float(data.get("probe_radius", 10.0)))
    _field("schedule", cfg.build_schedule)
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_config(data)


def example1_config(output_dir: str = "out/example1", t_end: float = 2.0, dt: float = 1e-4,
                    seed: int = 0) -> ExperimentConfig:
    prm = EXAMPLE1_PARAMS
    return parse_config({
        "schema_version": SCHEMA_VERSION,
        "problem": "example1-ncp",
        "model": "pdm",
        "schedule": {
            "gamma1": {"kind": "constant", "beta": prm["beta1"]},
            "gamma2": {"kind": "constant", "beta": prm["beta2"]},
            "gamma3": {"kind": "constant", "beta": prm["beta3"]},
        },
        "exponents": [prm["rho1"], prm["rho2"]],
        "deadzone": 1e-9,
        "disturbance": {"kind": "proportional", "q": prm["q"], "direction_seed": 1},
        "integrator": {"method": "rk4_adaptive_clip", "dt": dt, "t_end": t_end,
                       "stop_residual": 1e-8, "max_steps": 2_000_000, "record_stride": 10},
        "initial_conditions": [list(x) for x in EXAMPLE1_INITIAL],
        "output_dir": output_dir,
        "seed": seed,
    })


def with_overrides(cfg: ExperimentConfig, output_dir: Optional[str] = None,
                   seed: Optional[int] = None, t_end: Optional[float] = None,
                   dt: Optional[float] = None) -> ExperimentConfig:
    integ = cfg.integrator
    if t_end is not None:
        integ = replace(integ, t_end=t_end)
    if dt is not None:
        integ = replace(integ, dt=dt)
    return replace(cfg, integrator=integ,
                   output_dir=cfg.output_dir if output_dir is None else output_dir,
                   seed=cfg.seed if seed is None else seed)
