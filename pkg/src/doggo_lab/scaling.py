"""Gap-radius scaling of electromagnetic motors and the QDD mass budget.

With the motor mass concentrated near the air gap, scaling the gap radius by
``k`` scales mass by ``k``, torque by ``k**2`` and rotor inertia by ``k**3``.
A direct-drive motor matching an ``N:1`` reduction's output torque therefore
needs a radius ``sqrt(N)`` times larger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .actuator import QddActuator, reflected_inertia


@dataclass(frozen=True)
class ReferenceMotor:
    mass: float
    torque: float
    inertia: float

    def __post_init__(self):
        if min(self.mass, self.torque, self.inertia) <= 0:
            raise ValueError("reference motor values must be strictly positive")


@dataclass(frozen=True)
class ScalingReport:
    radius_factor: float
    mass_factor: float
    torque_factor: float
    inertia_factor: float

    def apply(self, ref: ReferenceMotor) -> ReferenceMotor:
        return ReferenceMotor(
            ref.mass * self.mass_factor,
            ref.torque * self.torque_factor,
            ref.inertia * self.inertia_factor,
        )


def scale_with_radius(ref: ReferenceMotor, k: float) -> ScalingReport:
    # ref only fixes the units; the factors are geometry alone
    if k <= 0:
        raise ValueError("radius factor must be positive")
    return ScalingReport(k, k, k * k, k * k * k)


def dd_equivalent_mass_factor(ratio: float) -> float:
    if ratio < 1:
        raise ValueError("reduction ratio must be >= 1")
    return math.sqrt(ratio)


@dataclass(frozen=True)
class MassBudget:
    budget: float
    transmission_mass: float | None
    passes: bool | None

    @property
    def margin(self) -> float | None:
        if self.transmission_mass is None:
            return None
        return self.budget - self.transmission_mass


def qdd_mass_budget(motor_mass: float, ratio: float, transmission_mass: float | None = None) -> MassBudget:
    """Largest transmission mass that still beats a bigger direct-drive motor.

    A transmission exactly at the budget counts as passing.
    """
    if motor_mass <= 0:
        raise ValueError("motor mass must be positive")
    budget = (dd_equivalent_mass_factor(ratio) - 1.0) * motor_mass
    passes = None if transmission_mass is None else transmission_mass <= budget
    return MassBudget(budget, transmission_mass, passes)


def inertia_ratio_for_torque(torque_ratio: float) -> float:
    if torque_ratio <= 0:
        raise ValueError("torque ratio must be positive")
    return torque_ratio**1.5


def fleet_mass_saving(act: QddActuator, count: int) -> float:
    """Mass saved across ``count`` actuators versus equal-torque direct drives."""
    if count < 1:
        raise ValueError("count must be >= 1")
    m = act.motor.mass
    dd_mass = dd_equivalent_mass_factor(act.ratio) * m
    return count * (dd_mass - (m + act.transmission_mass))


@dataclass(frozen=True)
class TorqueUpgrade:
    torque_ratio: float
    radius_factor: float
    mass_factor: float
    inertia_factor: float


def torque_upgrade(torque_ratio: float) -> TorqueUpgrade:
    """What a direct-drive motor must grow by to deliver ``torque_ratio`` more torque."""
    k = math.sqrt(torque_ratio)
    return TorqueUpgrade(torque_ratio, k, k, inertia_ratio_for_torque(torque_ratio))


def reflected_inertia_comparison(act: QddActuator) -> dict:
    """Output-side inertia of the geared actuator versus its direct-drive twin.

    The geared unit reflects ``I N^2``; the radius-scaled direct drive carries
    ``I N^(3/2)``. The two only agree at ``N = 1``, so both are reported.
    """
    ratio = act.ratio
    return {
        "qdd_reflected_inertia": reflected_inertia(act),
        "dd_equivalent_inertia": act.motor.rotor_inertia * ratio**1.5,
        "qdd_over_dd": math.sqrt(ratio),
    }


def scaling_summary(act: QddActuator, count: int = 8, robot_mass: float | None = None) -> dict:
    budget = qdd_mass_budget(act.motor.mass, act.ratio, act.transmission_mass)
    radius = scale_with_radius(
        ReferenceMotor(act.motor.mass, act.motor.peak_torque, act.motor.rotor_inertia),
        math.sqrt(act.ratio),
    )
    saving = fleet_mass_saving(act, count)
    out = {
        "ratio": act.ratio,
        "radius_factor": radius.radius_factor,
        "mass_factor": radius.mass_factor,
        "torque_factor": radius.torque_factor,
        "inertia_factor": radius.inertia_factor,
        "dd_heavier_pct": (radius.mass_factor - 1.0) * 100.0,
        "motor_mass": act.motor.mass,
        "transmission_mass": act.transmission_mass,
        "mass_budget": budget.budget,
        "budget_passes": budget.passes,
        "actuator_count": count,
        "fleet_mass_saving": saving,
        **reflected_inertia_comparison(act),
    }
    if robot_mass:
        out["fleet_saving_pct_of_robot"] = saving / robot_mass * 100.0
    return out
