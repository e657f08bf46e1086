"""Piecewise-sinusoid foot trajectories and phased per-leg commands.

One gait cycle is a stance piece followed by a flight piece. In stance the
foot sweeps linearly backward with a half-sine dip below the neutral height;
in flight it sweeps forward along a half-sine arc above it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .control import CompliancePdGains, LegCommand
from .errors import ValidationError
from .kinematics import FootPosition, LegGeometry, inverse_kinematics

LEG_NAMES = ("front_left", "front_right", "rear_left", "rear_right")
VELOCITY_DT = 1e-3


class GaitName(str, Enum):
    walk = "walk"
    trot = "trot"
    bound = "bound"
    pronk = "pronk"


PHASE_OFFSETS = {
    GaitName.walk: (0.0, 0.5, 0.25, 0.75),
    GaitName.trot: (0.0, 0.5, 0.5, 0.0),
    GaitName.bound: (0.0, 0.0, 0.5, 0.5),
    GaitName.pronk: (0.0, 0.0, 0.0, 0.0),
}

DEFAULT_STANCE_GAINS = CompliancePdGains(kp_theta=12.0, kd_theta=0.3, kp_gamma=40.0, kd_gamma=1.0)
DEFAULT_FLIGHT_GAINS = CompliancePdGains(kp_theta=8.0, kd_theta=0.2, kp_gamma=8.0, kd_gamma=0.2)


@dataclass(frozen=True)
class GaitParams:
    t_stance: float = 0.12
    t_flight: float = 0.08
    stride_length: float = 0.10
    step_height: float = 0.04
    stance_dip: float = 0.01
    neutral_extension: float = 0.18
    phase_offsets: tuple[float, float, float, float] = PHASE_OFFSETS[GaitName.trot]
    stance_gains: CompliancePdGains = DEFAULT_STANCE_GAINS
    flight_gains: CompliancePdGains = DEFAULT_FLIGHT_GAINS
    geometry: LegGeometry = field(default_factory=LegGeometry)

    def __post_init__(self):
        if self.t_stance <= 0:
            raise ValidationError("t_stance", "must be > 0")
        if self.t_flight <= 0:
            raise ValidationError("t_flight", "must be > 0")
        if self.stride_length < 0:
            raise ValidationError("stride_length", "must be >= 0")
        if self.step_height < 0 or self.stance_dip < 0:
            raise ValidationError("step_height", "arc amplitudes must be >= 0")
        if len(self.phase_offsets) != 4 or not all(0.0 <= p < 1.0 for p in self.phase_offsets):
            raise ValidationError("phase_offsets", "need four values in [0, 1)")
        object.__setattr__(self, "phase_offsets", tuple(float(p) for p in self.phase_offsets))
        self._check_reach()

    @property
    def period(self) -> float:
        return self.t_stance + self.t_flight

    @property
    def stance_fraction(self) -> float:
        return self.t_stance / self.period

    def _check_reach(self, n: int = 10_000):
        g = self.geometry
        phases = np.arange(n) / n
        r = np.array([foot_target(self, p).norm for p in phases])
        # the extremes sit at the piece ends and mid-piece apexes
        r = np.concatenate([r, [foot_target(self, p).norm for p in self._key_phases()]])
        if r.min() < g.r_min - 1e-12 or r.max() > g.r_max + 1e-12:
            raise ValidationError(
                "gait",
                f"foot targets span [{r.min():.4f}, {r.max():.4f}] m, outside the "
                f"workspace [{g.r_min:.3f}, {g.r_max:.3f}] m",
            )

    def _key_phases(self):
        s = self.stance_fraction
        return (0.0, 0.5 * s, s, s + 0.5 * (1.0 - s))


def foot_target(params: GaitParams, phase: float) -> FootPosition:
    """Hip-frame foot target at ``phase`` (wrapped into [0, 1))."""
    phase = phase % 1.0
    s = phase * params.period
    if s < params.t_stance:
        u = s / params.t_stance
        x = params.stride_length * (0.5 - u)
        z = -params.neutral_extension - params.stance_dip * math.sin(math.pi * u)
    else:
        u = (s - params.t_stance) / params.t_flight
        x = params.stride_length * (u - 0.5)
        z = -params.neutral_extension + params.step_height * math.sin(math.pi * u)
    return FootPosition(x, z)


def in_stance(params: GaitParams, phase: float) -> bool:
    return (phase % 1.0) * params.period < params.t_stance


def leg_phase(params: GaitParams, t: float, leg: int) -> float:
    return (t / params.period + params.phase_offsets[leg]) % 1.0


def leg_command(params: GaitParams, geom: LegGeometry, t: float, leg: int) -> LegCommand:
    phase = leg_phase(params, t, leg)
    target = inverse_kinematics(geom, foot_target(params, phase))
    ahead = inverse_kinematics(geom, foot_target(params, leg_phase(params, t + VELOCITY_DT, leg)))
    behind = inverse_kinematics(geom, foot_target(params, leg_phase(params, t - VELOCITY_DT, leg)))
    gains = params.stance_gains if in_stance(params, phase) else params.flight_gains
    return LegCommand(
        theta_d=target.theta,
        gamma_d=target.gamma,
        theta_dot_d=(ahead.theta - behind.theta) / (2 * VELOCITY_DT),
        gamma_dot_d=(ahead.gamma - behind.gamma) / (2 * VELOCITY_DT),
        gains=gains,
    )


def leg_commands(params: GaitParams, geom: LegGeometry, t: float) -> list[LegCommand]:
    return [leg_command(params, geom, t, leg) for leg in range(4)]


def preset(name: GaitName | str, base: GaitParams | None = None) -> GaitParams:
    name = GaitName(name)
    base = base if base is not None else GaitParams()
    return replace(base, phase_offsets=PHASE_OFFSETS[name])


def preview_rows(params: GaitParams, geom: LegGeometry, duration: float, dt: float = 0.01):
    """Yield (t, leg, phase, x, z, theta_d, gamma_d) rows for plotting."""
    n = int(round(duration / dt))
    for k in range(n + 1):
        t = k * dt
        for leg in range(4):
            phase = leg_phase(params, t, leg)
            p = foot_target(params, phase)
            s = inverse_kinematics(geom, p)
            yield (t, leg, phase, p.x, p.z, s.theta, s.gamma)
