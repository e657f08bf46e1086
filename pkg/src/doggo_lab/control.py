"""Virtual-compliance leg control and the analysis tools that go with it.

Commands live in virtual-leg space (theta, gamma). A PD law produces
generalized torques there, which are mapped onto the two motors with the
transpose of the coordinate Jacobian. A slow outer loop refreshes commands;
a fast inner loop runs the PD against the latest command.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .actuator import QddActuator, output_torque_from_current
from .errors import ConfigError, EmptySeries, NoCrossover, ValidationError
from .kinematics import LegGeometry, MotorAngles, foot_force_from_torques, jacobian

MINUS_3DB = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class CompliancePdGains:
    kp_theta: float = 0.0
    kd_theta: float = 0.0
    kp_gamma: float = 0.0
    kd_gamma: float = 0.0

    def __post_init__(self):
        for name in ("kp_theta", "kd_theta", "kp_gamma", "kd_gamma"):
            if getattr(self, name) < 0:
                raise ValidationError(name, "gains must be >= 0")


@dataclass(frozen=True)
class LegCommand:
    theta_d: float
    gamma_d: float
    theta_dot_d: float = 0.0
    gamma_dot_d: float = 0.0
    gains: CompliancePdGains = CompliancePdGains()

    def __post_init__(self):
        if not (0.0 <= self.gamma_d <= math.pi):
            raise ValidationError("gamma_d", f"must lie in the range [0, pi], got {self.gamma_d}")


def pd_virtual_torques(cmd: LegCommand, theta: float, gamma: float,
                       theta_dot: float = 0.0, gamma_dot: float = 0.0) -> tuple[float, float]:
    g = cmd.gains
    tau_theta = g.kp_theta * (cmd.theta_d - theta) + g.kd_theta * (cmd.theta_dot_d - theta_dot)
    tau_gamma = g.kp_gamma * (cmd.gamma_d - gamma) + g.kd_gamma * (cmd.gamma_dot_d - gamma_dot)
    return tau_theta, tau_gamma


def generalized_to_motor_torques(tau_theta: float, tau_gamma: float) -> tuple[float, float]:
    return 0.5 * (tau_theta + tau_gamma), 0.5 * (tau_theta - tau_gamma)


def estimate_foot_force(geom: LegGeometry, a: MotorAngles, currents: Sequence[float],
                        act: QddActuator) -> np.ndarray:
    """Foot force from measured motor currents through K_t, the reduction and J^-T."""
    tau = [output_torque_from_current(act, i) for i in currents]
    return foot_force_from_torques(jacobian(geom, a), tau)


@dataclass(frozen=True)
class TwoRateConfig:
    outer_rate: float = 100.0
    inner_rate: float = 10000.0
    encoder_cpr: int = 2000
    quantize_encoders: bool = False
    encoder_dither: bool = False
    torque_limit: float | None = None  # optional bench limit on output torque, Nm

    def __post_init__(self):
        if self.outer_rate <= 0 or self.inner_rate <= 0:
            raise ConfigError("control rates must be positive")
        ratio = self.inner_rate / self.outer_rate
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigError(
                f"inner_rate ({self.inner_rate:g} Hz) must be an integer multiple "
                f"of outer_rate ({self.outer_rate:g} Hz)"
            )
        if self.encoder_cpr < 1:
            raise ConfigError("encoder_cpr must be >= 1")
        if self.torque_limit is not None and self.torque_limit < 0:
            raise ConfigError("torque_limit must be >= 0")

    @property
    def ticks_per_command(self) -> int:
        return int(round(self.inner_rate / self.outer_rate))

    @property
    def dt(self) -> float:
        return 1.0 / self.inner_rate

    @property
    def encoder_resolution(self) -> float:
        return 2.0 * math.pi / self.encoder_cpr


def quantize_angle(angle: float, resolution: float) -> float:
    return math.floor(angle / resolution) * resolution


CommandSource = Callable[[float], Sequence[LegCommand]]


class TwoRateLoop:
    """Interleaved outer/inner control loop with a zero-order hold in between.

    ``source(t)`` returns one LegCommand per leg and is called once every
    ``cfg.ticks_per_command`` inner ticks. Each call to :meth:`step` is one
    inner tick and returns the unclamped motor torque pair for every leg.
    """

    def __init__(self, cfg: TwoRateConfig, source: CommandSource, seed: int = 0):
        self.cfg = cfg
        self.source = source
        self.tick = 0
        self.outer_updates = 0
        self.held: Sequence[LegCommand] | None = None
        self._rng = np.random.default_rng(seed) if cfg.encoder_dither else None

    @property
    def time(self) -> float:
        return self.tick / self.cfg.inner_rate

    def measure(self, phi: float) -> float:
        if not self.cfg.quantize_encoders:
            return phi
        res = self.cfg.encoder_resolution
        if self._rng is not None:
            phi = phi + self._rng.uniform(-0.5, 0.5) * res
        return quantize_angle(phi, res)

    def step(self, angles: Sequence[tuple[float, float]],
             rates: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
        if self.tick % self.cfg.ticks_per_command == 0:
            self.held = tuple(self.source(self.time))
            self.outer_updates += 1
        out = []
        for cmd, (phi1, phi2), (w1, w2) in zip(self.held, angles, rates):
            p1, p2 = self.measure(phi1), self.measure(phi2)
            tt, tg = pd_virtual_torques(
                cmd, 0.5 * (p1 + p2), 0.5 * (p1 - p2), 0.5 * (w1 + w2), 0.5 * (w1 - w2)
            )
            out.append(generalized_to_motor_torques(tt, tg))
        self.tick += 1
        return out


def transparency_mape(estimated, measured, min_abs: float = 0.1) -> float:
    """Mean absolute percent error, skipping samples with |measured| <= min_abs."""
    est = np.asarray(estimated, dtype=float).ravel()
    meas = np.asarray(measured, dtype=float).ravel()
    if est.shape != meas.shape:
        raise ValueError(f"series lengths differ: {est.size} vs {meas.size}")
    keep = np.abs(meas) > min_abs
    if not keep.any():
        raise EmptySeries("no samples with |measured| above the exclusion threshold")
    return float(np.mean(np.abs(est[keep] - meas[keep]) / np.abs(meas[keep])) * 100.0)


def first_order_response(pole_hz: float, freqs) -> list[tuple[float, float, float]]:
    """Gain and phase of 1 / (1 + j f / pole) at each frequency."""
    f = np.asarray(freqs, dtype=float)
    gain = 1.0 / np.sqrt(1.0 + (f / pole_hz) ** 2)
    phase = -np.arctan(f / pole_hz)
    return list(zip(f.tolist(), gain.tolist(), phase.tolist()))


def bandwidth_crossover(response) -> float:
    """Frequency where the tracking gain first falls through -3 dB.

    ``response`` is a sequence of (freq_hz, gain, phase_rad) rows with strictly
    increasing frequency. The crossing is located by linear interpolation in
    log-frequency / log-gain between the bracketing samples.
    """
    rows = np.asarray(response, dtype=float)
    if rows.ndim != 2 or rows.shape[0] < 2 or rows.shape[1] < 2:
        raise ValueError("need at least two (freq, gain[, phase]) samples")
    f, g = rows[:, 0], rows[:, 1]
    if np.any(np.diff(f) <= 0):
        raise ValueError("frequencies must be strictly increasing")
    if np.any(f <= 0) or np.any(g <= 0):
        raise ValueError("frequencies and gains must be positive for log interpolation")
    if g[0] < MINUS_3DB:
        raise ValueError("gain already below -3 dB at the first sample; start the sweep lower")
    below = np.nonzero(g < MINUS_3DB)[0]
    if below.size == 0:
        raise NoCrossover(float(f[-1]))
    i = int(below[0])
    lf0, lf1 = math.log(f[i - 1]), math.log(f[i])
    lg0, lg1 = math.log(g[i - 1]), math.log(g[i])
    target = math.log(MINUS_3DB)
    frac = (target - lg0) / (lg1 - lg0)
    return math.exp(lf0 + frac * (lf1 - lf0))


def log_sweep(f_lo: float = 5.0, f_hi: float = 400.0, n: int = 30) -> np.ndarray:
    return np.geomspace(f_lo, f_hi, n)
