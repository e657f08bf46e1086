"""Experiment configuration files (JSON) and the experiment runner."""

from __future__ import annotations

import dataclasses
import json
import math
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .actuator import QddActuator, actuator_from_dict, load_actuator
from .control import (
    CompliancePdGains,
    LegCommand,
    TwoRateConfig,
    bandwidth_crossover,
    first_order_response,
    log_sweep,
)
from .errors import ConfigError, ParseError, SimulationError, ValidationError
from .gait import GaitName, GaitParams, PHASE_OFFSETS
from .kinematics import LegGeometry, check_suite
from .metrics import load_robot_fixtures
from .scaling import scaling_summary
from .sim import BodyParams, JumpScript, simulate_jump, simulate_run

EXPERIMENTS = ("jump", "run", "scaling", "bandwidth", "kin-check")


@dataclass(frozen=True)
class RunSpec:
    gait: GaitParams = field(default_factory=GaitParams)
    gait_name: str = "trot"
    duration: float = 5.0


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    settings: Any = None  # JumpScript, RunSpec or a plain dict
    body: BodyParams = field(default_factory=BodyParams)
    geometry: LegGeometry = field(default_factory=LegGeometry)
    actuator: QddActuator = field(default_factory=lambda: load_actuator("doggo"))
    actuator_name: str | None = "doggo"
    control: TwoRateConfig = field(default_factory=TwoRateConfig)
    seed: int = 0
    output: str = "doggo_lab_out"
    source: dict = field(default_factory=dict)


def _build(cls, data, path: str, **extra):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ValidationError(path, f"expected an object, got {type(data).__name__}")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValidationError(f"{path}.{unknown[0]}", f"unknown key; expected one of {sorted(known)}")
    kwargs = dict(data)
    kwargs.update(extra)
    try:
        return cls(**kwargs)
    except ValidationError as exc:
        raise ValidationError(f"{path}.{exc.field}", str(exc).split(": ", 1)[-1]) from exc
    except (TypeError, ValueError) as exc:
        raise ValidationError(path, str(exc)) from exc


def _gains(data, path):
    return _build(CompliancePdGains, data, path)


def _command(data, path):
    data = dict(data or {})
    gains = _gains(data.pop("gains", None), f"{path}.gains") if "gains" in data else None
    extra = {"gains": gains} if gains is not None else {}
    return _build(LegCommand, data, path, **extra)


def _jump(data, path) -> JumpScript:
    data = dict(data or {})
    extra = {}
    if "extend_command" in data:
        extra["extend_command"] = _command(data.pop("extend_command"), f"{path}.extend_command")
    if "crouch_gains" in data:
        extra["crouch_gains"] = _gains(data.pop("crouch_gains"), f"{path}.crouch_gains")
    return _build(JumpScript, data, path, **extra)


def _gait(data, path, geometry: LegGeometry) -> tuple[GaitParams, str]:
    if isinstance(data, str):
        data = {"preset": data}
    data = dict(data or {})
    name = data.pop("preset", "trot")
    if name not in {g.value for g in GaitName}:
        raise ValidationError(f"{path}.preset", f"unknown gait {name!r}; available: {[g.value for g in GaitName]}")
    data.pop("geometry", None)
    extra = {"geometry": geometry}
    for key in ("stance_gains", "flight_gains"):
        if key in data:
            extra[key] = _gains(data.pop(key), f"{path}.{key}")
    if "phase_offsets" not in data:
        extra["phase_offsets"] = PHASE_OFFSETS[GaitName(name)]
    else:
        data["phase_offsets"] = tuple(data["phase_offsets"])
    return _build(GaitParams, data, path, **extra), name


def parse_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ValidationError("config", "top level must be a JSON object")
    allowed = {"body", "geometry", "actuator", "control", "experiment", "seed", "output"}
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ValidationError(unknown[0], f"unknown key; expected one of {sorted(allowed)}")

    body = _build(BodyParams, raw.get("body"), "body")
    geometry = _build(LegGeometry, raw.get("geometry"), "geometry")
    act_raw = raw.get("actuator", "doggo")
    if isinstance(act_raw, str):
        actuator, act_name = load_actuator(act_raw), act_raw
    elif isinstance(act_raw, dict):
        try:
            actuator = actuator_from_dict(act_raw)
        except ValidationError as exc:
            raise ValidationError(f"actuator.{exc.field}", str(exc).split(": ", 1)[-1]) from exc
        act_name = None
    else:
        raise ValidationError("actuator", "must be a fixture name or an object")
    try:
        control = _build(TwoRateConfig, raw.get("control"), "control")
    except ConfigError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError("control", str(exc)) from exc

    exp = raw.get("experiment")
    if exp is None:
        raise ValidationError("experiment", f"required; one of {list(EXPERIMENTS)}")
    if isinstance(exp, str):
        kind, body_cfg = exp, {}
    elif isinstance(exp, dict) and len(exp) == 1:
        (kind, body_cfg), = exp.items()
    else:
        raise ValidationError("experiment", f"must name exactly one of {list(EXPERIMENTS)}")
    if kind not in EXPERIMENTS:
        raise ValidationError("experiment", f"unknown experiment {kind!r}; expected one of {list(EXPERIMENTS)}")

    path = f"experiment.{kind}"
    if kind == "jump":
        settings = _jump(body_cfg, path)
    elif kind == "run":
        body_cfg = dict(body_cfg or {})
        unknown = sorted(set(body_cfg) - {"gait", "duration"})
        if unknown:
            raise ValidationError(f"{path}.{unknown[0]}", "unknown key; expected gait, duration")
        gait, name = _gait(body_cfg.get("gait"), f"{path}.gait", geometry)
        duration = float(body_cfg.get("duration", 5.0))
        if duration < 10 * gait.period:
            raise ValidationError(f"{path}.duration", "must cover at least 10 strides")
        settings = RunSpec(gait, name, duration)
    else:
        settings = dict(body_cfg or {})

    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ValidationError("seed", "must be an integer")
    return ExperimentConfig(kind, settings, body, geometry, actuator, act_name, control,
                            seed, str(raw.get("output", "doggo_lab_out")), raw)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read config ({exc.strerror})") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_config(raw)


# -- running ----------------------------------------------------------------

def versions() -> dict:
    return {"doggo_lab": __version__, "python": platform.python_version(), "numpy": np.__version__}


def _clean(obj):
    """JSON-safe copy: dataclasses to dicts, non-finite floats to None."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _clean(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def config_echo(cfg: ExperimentConfig) -> dict:
    return _clean({
        "experiment": cfg.experiment,
        "settings": cfg.settings,
        "body": cfg.body,
        "geometry": cfg.geometry,
        "actuator": cfg.actuator_name or cfg.actuator.to_dict(),
        "control": cfg.control,
        "seed": cfg.seed,
        "output": cfg.output,
    })


def doggo_soft_targets() -> dict:
    doggo = load_robot_fixtures()[0]
    return {k: doggo.value(k) for k in ("v_ss", "cot", "jump_h", "agility")}


def execute(cfg: ExperimentConfig) -> tuple[dict, object]:
    """Run the experiment; returns (metrics, trace or None)."""
    if cfg.experiment == "jump":
        trace, res = simulate_jump(cfg.body, cfg.geometry, cfg.actuator, cfg.settings,
                                   cfg.control, cfg.seed)
        # commands are symmetric; any pitch is reported, not corrected
        metrics = dataclasses.asdict(res)
        metrics["max_abs_pitch"] = float(np.max(np.abs(trace.body[:, 2])))
        return metrics, trace
    if cfg.experiment == "run":
        run: RunSpec = cfg.settings
        trace, res = simulate_run(cfg.body, cfg.geometry, cfg.actuator, run.gait,
                                  run.duration, cfg.control, cfg.seed)
        return dataclasses.asdict(res), trace
    if cfg.experiment == "scaling":
        count = int(cfg.settings.get("count", 8))
        return scaling_summary(cfg.actuator, count, cfg.body.mass), None
    if cfg.experiment == "bandwidth":
        pole = float(cfg.settings.get("pole", 150.0))
        sweep = log_sweep(cfg.settings.get("f_min", 5.0), cfg.settings.get("f_max", 400.0),
                          int(cfg.settings.get("points", 30)))
        return {"pole_hz": pole, "crossover_hz": bandwidth_crossover(first_order_response(pole, sweep))}, None
    return check_suite(cfg.geometry, int(cfg.settings.get("samples", 100_000)), cfg.seed), None


def build_report(cfg: ExperimentConfig, metrics: dict) -> dict:
    report = {
        "experiment": cfg.experiment,
        "metrics": _clean(metrics),
        "config": config_echo(cfg),
        "versions": versions(),
    }
    if cfg.experiment in ("jump", "run"):
        targets = doggo_soft_targets()
        keys = ("jump_h", "agility") if cfg.experiment == "jump" else ("v_ss", "cot")
        report["soft_targets"] = {k: targets[k] for k in keys}
    return report


def run_experiment(cfg: ExperimentConfig, stderr=None) -> int:
    """Run ``cfg`` and write ``<output>.report.json`` (and ``.trace.csv`` for sims).

    Returns 0 on success, 2 on a simulation failure, 1 on a configuration error.
    """
    stderr = stderr or sys.stderr
    try:
        metrics, trace = execute(cfg)
    except SimulationError as exc:
        print(f"{type(exc).__name__}: {exc}", file=stderr)
        return 2
    except ConfigError as exc:
        print(f"{type(exc).__name__}: {exc}", file=stderr)
        return 1
    prefix = Path(cfg.output)
    if prefix.parent != Path("."):
        prefix.parent.mkdir(parents=True, exist_ok=True)
    if trace is not None:
        trace.to_csv(f"{prefix}.trace.csv")
    report = build_report(cfg, metrics)
    Path(f"{prefix}.report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return 0


def report_schema() -> dict:
    from importlib import resources

    return json.loads(resources.files("doggo_lab").joinpath("data/report.schema.json").read_text())
