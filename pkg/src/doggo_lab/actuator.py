"""Quasi-direct-drive actuator model: current to torque, reduction, limits."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from importlib import resources
from typing import NamedTuple

from .errors import ValidationError

MOTOR_FIELDS = (
    "k_t",
    "mass",
    "rotor_inertia",
    "continuous_torque",
    "peak_torque",
    "winding_resistance",
    "max_speed",
)


@dataclass(frozen=True)
class MotorParams:
    """Motor-side constants. Torques in Nm at the rotor, speed in rad/s."""

    k_t: float
    mass: float
    rotor_inertia: float
    continuous_torque: float
    peak_torque: float
    winding_resistance: float
    max_speed: float

    def __post_init__(self):
        for name in MOTOR_FIELDS:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(name, f"must be strictly positive, got {value!r}")
        if self.peak_torque < self.continuous_torque:
            raise ValidationError("peak_torque", "must be >= continuous_torque")


@dataclass(frozen=True)
class QddActuator:
    motor: MotorParams
    ratio: float = 1.0
    transmission_mass: float = 0.0
    efficiency: float = 1.0

    def __post_init__(self):
        if not (1.0 <= self.ratio <= 10.0):
            raise ValidationError("ratio", f"QDD reduction must lie in [1, 10], got {self.ratio}")
        if self.transmission_mass < 0:
            raise ValidationError("transmission_mass", "must be >= 0")
        if not (0.0 < self.efficiency <= 1.0):
            raise ValidationError("efficiency", "must lie in (0, 1]")

    @property
    def gain(self) -> float:
        """Output torque per unit motor torque."""
        return self.ratio * self.efficiency

    @property
    def peak_output_torque(self) -> float:
        return self.motor.peak_torque * self.gain

    @property
    def continuous_output_torque(self) -> float:
        return self.motor.continuous_torque * self.gain

    @property
    def max_output_speed(self) -> float:
        return self.motor.max_speed / self.ratio

    @property
    def total_mass(self) -> float:
        return self.motor.mass + self.transmission_mass

    def to_dict(self) -> dict:
        d = asdict(self.motor)
        d.update(ratio=self.ratio, transmission_mass=self.transmission_mass,
                 efficiency=self.efficiency)
        return d


def output_torque_from_current(act: QddActuator, current: float) -> float:
    return act.gain * act.motor.k_t * current


def current_from_output_torque(act: QddActuator, torque: float) -> float:
    return torque / (act.gain * act.motor.k_t)


def motor_torque_from_output(act: QddActuator, torque: float) -> float:
    return torque / act.gain


def reflected_inertia(act: QddActuator) -> float:
    return act.motor.rotor_inertia * act.ratio**2


def torque_density(act: QddActuator) -> float:
    """Peak output torque per kg of motor plus transmission."""
    return act.peak_output_torque / act.total_mass


@dataclass
class TorqueBudget:
    """Sliding burst window for one actuator.

    Commands may exceed the continuous rating for at most ``window`` seconds
    in a row; after that the output is held to the continuous level until the
    command drops back under it.
    """

    window: float = 1.0
    above_since: float | None = None
    last_t: float = -math.inf


class ClampedTorque(NamedTuple):
    torque: float
    saturated: bool


def clamp_torque(act: QddActuator, budget: TorqueBudget, tau_cmd: float, t: float) -> ClampedTorque:
    if t < budget.last_t:
        raise ValueError(f"time went backwards: {t} < {budget.last_t}")
    budget.last_t = t
    cont = act.continuous_output_torque
    if abs(tau_cmd) > cont:
        if budget.above_since is None:
            budget.above_since = t
        burst_spent = t - budget.above_since >= budget.window
    else:
        budget.above_since = None
        burst_spent = False
    limit = cont if burst_spent else act.peak_output_torque
    tau = min(limit, max(-limit, tau_cmd))
    return ClampedTorque(tau, tau != tau_cmd)


def speed_limited_torque(act: QddActuator, tau: float, omega_out: float) -> float:
    """Linear torque-speed envelope: motoring torque fades to zero at max speed.

    Braking torque (opposing the motion) is left untouched.
    """
    if tau * omega_out <= 0.0:
        return tau
    frac = max(0.0, 1.0 - abs(omega_out) / act.max_output_speed)
    limit = act.peak_output_torque * frac
    return min(limit, max(-limit, tau))


def actuator_from_dict(d: dict) -> QddActuator:
    missing = [k for k in (*MOTOR_FIELDS, "ratio") if k not in d]
    if missing:
        raise ValidationError(missing[0], "required actuator key is missing")
    try:
        motor = MotorParams(**{k: float(d[k]) for k in MOTOR_FIELDS})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError("actuator", str(exc)) from exc
    return QddActuator(
        motor=motor,
        ratio=float(d["ratio"]),
        transmission_mass=float(d.get("transmission_mass", 0.0)),
        efficiency=float(d.get("efficiency", 1.0)),
    )


def _fixture_data() -> dict:
    text = resources.files("doggo_lab").joinpath("data/actuators.json").read_text()
    return json.loads(text)


def available_actuators() -> list[str]:
    return sorted(_fixture_data())


def load_actuator(name: str) -> QddActuator:
    data = _fixture_data()
    if name not in data:
        raise ValidationError(
            "actuator", f"unknown fixture {name!r}; available: {', '.join(sorted(data))}"
        )
    return actuator_from_dict(data[name])
