"""Planar (sagittal) quadruped simulator.

The trunk is a rigid body with pitch. The four legs are massless five-bar
linkages; a swinging leg's only dynamics are its rotors' reflected inertia.
A foot in contact is pinned at its anchor (no slip, unilateral): the leg
angles follow from the body pose and the anchor, and the motor torques are
mapped through J^-T into the ground reaction acting on the body. A foot
lifts off when its vertical ground reaction turns negative.

Frames: world x forward, z up. Pitch is positive nose-up, so a body vector
(bx, bz) maps to world (bx cos q - bz sin q, bx sin q + bz cos q). Hip frames
are aligned with the body frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .actuator import (
    QddActuator,
    TorqueBudget,
    clamp_torque,
    reflected_inertia,
    speed_limited_torque,
)
from .control import LegCommand, CompliancePdGains, TwoRateConfig, TwoRateLoop
from .errors import FallDetected, NoTakeoff, NumericalDivergence
from .gait import GaitParams, leg_commands
from .kinematics import (
    SINGULAR_CONDITION,
    LegGeometry,
    condition_2x2,
    gamma_for_length,
    jacobian_entries,
    leg_length,
)
from .metrics import JumpResult, RunResult, electrical_power, jump_result, run_result
from .trace import Trace, TraceRecorder, detect_events

__all__ = [
    "BodyParams",
    "LegState",
    "SimState",
    "Simulator",
    "JumpScript",
    "standing_state",
    "simulate_jump",
    "simulate_run",
    "detect_events",
    "simulate_hold",
    "ballistic_state",
    "ControlledRun",
]

MAX_HEIGHT = 10.0
MAX_SPEED = 50.0
FALL_HEIGHT = 0.05
FALL_PITCH = 1.0


@dataclass(frozen=True)
class BodyParams:
    mass: float = 4.8
    pitch_inertia: float = 0.078  # uniform 0.42 m x 0.14 m box
    hip_x: float = 0.17
    gravity: float = 9.81

    def __post_init__(self):
        if self.mass <= 0 or self.pitch_inertia <= 0:
            raise ValueError("mass and pitch_inertia must be positive")

    @property
    def weight(self) -> float:
        return self.mass * self.gravity


@dataclass(frozen=True, slots=True)
class LegState:
    phi1: float
    phi2: float
    phi1_dot: float = 0.0
    phi2_dot: float = 0.0
    contact: bool = False
    anchor_x: float = 0.0
    anchor_z: float = 0.0


@dataclass(frozen=True, slots=True)
class SimState:
    t: float
    x: float
    z: float
    pitch: float
    vx: float
    vz: float
    pitch_rate: float
    legs: tuple[LegState, ...]

    @property
    def body(self) -> tuple[float, ...]:
        return (self.x, self.z, self.pitch, self.vx, self.vz, self.pitch_rate)


def _wrap(a: float) -> float:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


class Simulator:
    """Integrates the trunk and legs one inner-loop tick at a time.

    After each :meth:`step`, ``last_grf`` holds the world-frame ground
    reaction applied by every leg and ``last_foot_force`` the hip-frame force
    each leg's motors exert at the foot (J^-T tau), both for the step just
    taken.
    """

    def __init__(self, body: BodyParams, geom: LegGeometry, act: QddActuator,
                 dt: float = 1e-4, hard_stop_stiffness: float = 2e5,
                 hard_stop_damping: float = 400.0):
        self.body = body
        self.geom = geom
        self.act = act
        self.dt = dt
        self.rotor_inertia = reflected_inertia(act)
        self.hip_offsets = (body.hip_x, body.hip_x, -body.hip_x, -body.hip_x)
        self.hard_stop_stiffness = hard_stop_stiffness
        self.hard_stop_damping = hard_stop_damping
        self.last_grf = [(0.0, 0.0)] * 4
        self.last_foot_force = [(0.0, 0.0)] * 4

    # -- geometry helpers ------------------------------------------------

    def hip_world(self, s: SimState, leg: int) -> tuple[float, float]:
        h = self.hip_offsets[leg]
        return s.x + h * math.cos(s.pitch), s.z + h * math.sin(s.pitch)

    def foot_world(self, s: SimState, leg: int) -> tuple[float, float]:
        ls = s.legs[leg]
        hx, hz = self.hip_world(s, leg)
        theta, gamma = 0.5 * (ls.phi1 + ls.phi2), 0.5 * (ls.phi1 - ls.phi2)
        r = leg_length(self.geom, gamma)
        bx, bz = r * math.sin(theta), -r * math.cos(theta)
        c, sn = math.cos(s.pitch), math.sin(s.pitch)
        return hx + bx * c - bz * sn, hz + bx * sn + bz * c

    def _anchor_in_hip(self, x, z, q, h, ax, az):
        c, s = math.cos(q), math.sin(q)
        dx, dz = ax - x, az - z
        return dx * c + dz * s - h, -dx * s + dz * c

    def _pinned_angles(self, px, pz, theta_prev):
        """Leg angles reaching hip-frame point (px, pz); gamma clamps at the stops."""
        g = self.geom
        l1, l2 = g.l1, g.l2
        r = math.hypot(px, pz)
        rc = min(g.r_max, max(g.r_min, r))
        c = (l1 * l1 + rc * rc - l2 * l2) / (2.0 * l1 * rc)
        gamma = math.acos(min(1.0, max(-1.0, c)))
        theta = math.atan2(px, -pz)
        theta = theta_prev + _wrap(theta - theta_prev)
        return theta, gamma, r

    # -- dynamics ----------------------------------------------------------

    def step(self, s: SimState, torques: Sequence[tuple[float, float]]) -> SimState:
        geom, body, dt = self.geom, self.body, self.dt
        c, sn = math.cos(s.pitch), math.sin(s.pitch)
        fx_tot, fz_tot, moment = 0.0, 0.0, 0.0
        contact_now = []
        grf_out, force_out = [], []

        for leg, (ls, (t1, t2)) in enumerate(zip(s.legs, torques)):
            theta, gamma = 0.5 * (ls.phi1 + ls.phi2), 0.5 * (ls.phi1 - ls.phi2)
            j11, j12, j21, j22 = jacobian_entries(geom, theta, gamma)
            det = j11 * j22 - j12 * j21
            if condition_2x2(j11, j12, j21, j22) < SINGULAR_CONDITION:
                # solve J^T F = tau
                fbx = (j22 * t1 - j21 * t2) / det
                fbz = (-j12 * t1 + j11 * t2) / det
            else:
                fbx = fbz = 0.0
            force_out.append((fbx, fbz))

            if not ls.contact:
                contact_now.append(False)
                grf_out.append((0.0, 0.0))
                continue

            # reaction on the robot is opposite to what the foot pushes with
            gbx, gbz = -fbx, -fbz
            px, pz = self._anchor_in_hip(s.x, s.z, s.pitch, self.hip_offsets[leg],
                                         ls.anchor_x, ls.anchor_z)
            r = math.hypot(px, pz)
            if r <= geom.r_min + 1e-4 and r > 0.0:
                # mechanical fold stop acting along the leg
                rdot = self._radial_rate(s, leg, px, pz, r)
                push = self.hard_stop_stiffness * (geom.r_min + 1e-4 - r) - self.hard_stop_damping * rdot
                if push > 0.0:
                    gbx += -px / r * push
                    gbz += -pz / r * push
            gwx, gwz = gbx * c - gbz * sn, gbx * sn + gbz * c
            if gwz < 0.0 or r >= geom.r_max:
                contact_now.append(False)
                grf_out.append((0.0, 0.0))
                continue
            contact_now.append(True)
            grf_out.append((gwx, gwz))
            fx_tot += gwx
            fz_tot += gwz
            moment += (ls.anchor_x - s.x) * gwz - (ls.anchor_z - s.z) * gwx

        ax = fx_tot / body.mass
        az = fz_tot / body.mass - body.gravity
        aq = moment / body.pitch_inertia
        vx, vz, w = s.vx + ax * dt, s.vz + az * dt, s.pitch_rate + aq * dt
        x, z, q = s.x + vx * dt, s.z + vz * dt, s.pitch + w * dt
        t = s.t + dt

        if not all(map(math.isfinite, (x, z, q, vx, vz, w))) or abs(z) > MAX_HEIGHT \
                or math.hypot(vx, vz) > MAX_SPEED:
            raise NumericalDivergence(f"state left sanity bounds at t={t:.4f}s (z={z:.3g}, v=({vx:.3g}, {vz:.3g}))")

        new_legs = []
        inertia = self.rotor_inertia
        for leg, (ls, (t1, t2)) in enumerate(zip(s.legs, torques)):
            h = self.hip_offsets[leg]
            theta_prev = 0.5 * (ls.phi1 + ls.phi2)
            if contact_now[leg]:
                px, pz = self._anchor_in_hip(x, z, q, h, ls.anchor_x, ls.anchor_z)
                theta, gamma, _ = self._pinned_angles(px, pz, theta_prev)
                p1, p2 = theta + gamma, theta - gamma
                new_legs.append(LegState(p1, p2, (p1 - ls.phi1) / dt, (p2 - ls.phi2) / dt,
                                         True, ls.anchor_x, ls.anchor_z))
                continue
            # free leg: rotor inertia only
            w1 = ls.phi1_dot + t1 / inertia * dt
            w2 = ls.phi2_dot + t2 / inertia * dt
            p1, p2 = ls.phi1 + w1 * dt, ls.phi2 + w2 * dt
            new_legs.append(LegState(p1, p2, w1, w2, False))

        new = SimState(t, x, z, q, vx, vz, w, tuple(new_legs))
        new = self._touchdowns(s, new)
        self.last_grf = grf_out
        self.last_foot_force = force_out
        return new

    def _radial_rate(self, s: SimState, leg: int, px: float, pz: float, r: float) -> float:
        # rate of change of hip-to-anchor distance from the body motion
        h = self.hip_offsets[leg]
        c, sn = math.cos(s.pitch), math.sin(s.pitch)
        hvx = s.vx - h * sn * s.pitch_rate
        hvz = s.vz + h * c * s.pitch_rate
        # world vector hip->foot and its rate (foot fixed)
        wx, wz = px * c - pz * sn, px * sn + pz * c
        return -(wx * hvx + wz * hvz) / r

    def _touchdowns(self, old: SimState, new: SimState) -> SimState:
        legs = list(new.legs)
        changed = False
        for leg, ls in enumerate(new.legs):
            if ls.contact or old.legs[leg].contact:
                continue
            fx1, fz1 = self.foot_world(new, leg)
            if fz1 > 0.0:
                continue
            fx0, fz0 = self.foot_world(old, leg)
            if fz1 - fz0 >= 0.0:
                continue
            frac = fz0 / (fz0 - fz1) if fz0 > 0.0 else 0.0
            ax = fx0 + frac * (fx1 - fx0)
            px, pz = self._anchor_in_hip(new.x, new.z, new.pitch, self.hip_offsets[leg], ax, 0.0)
            theta, gamma, _ = self._pinned_angles(px, pz, 0.5 * (ls.phi1 + ls.phi2))
            p1, p2 = theta + gamma, theta - gamma
            # the massless foot stops dead; rotor speed follows the body motion next tick
            legs[leg] = LegState(p1, p2, 0.0, 0.0, True, ax, 0.0)
            changed = True
        return replace(new, legs=tuple(legs)) if changed else new


def standing_state(sim: Simulator, gamma: float, theta: float = 0.0, x: float = 0.0) -> SimState:
    """All four feet pinned on the ground with the legs at (theta, gamma)."""
    r = leg_length(sim.geom, gamma)
    z = r * math.cos(theta)
    legs = []
    for h in sim.hip_offsets:
        legs.append(LegState(theta + gamma, theta - gamma, 0.0, 0.0, True,
                             x + h + r * math.sin(theta), 0.0))
    return SimState(0.0, x, z, 0.0, 0.0, 0.0, 0.0, tuple(legs))


def ballistic_state(z: float, vx: float, vz: float, gamma: float = 1.2) -> SimState:
    legs = tuple(LegState(gamma, -gamma) for _ in range(4))
    return SimState(0.0, 0.0, z, 0.0, vx, vz, 0.0, legs)


# -- closed-loop runner ------------------------------------------------------

@dataclass
class ControlledRun:
    """Wires the two-rate controller, torque limits and the plant together."""

    sim: Simulator
    loop: TwoRateLoop
    torque_limit: float | None = None
    budgets: list[TorqueBudget] = field(default_factory=lambda: [TorqueBudget() for _ in range(8)])
    recorder: TraceRecorder = field(default_factory=TraceRecorder)

    def motor_torques(self, s: SimState) -> list[tuple[float, float]]:
        act = self.sim.act
        angles = [(ls.phi1, ls.phi2) for ls in s.legs]
        rates = [(ls.phi1_dot, ls.phi2_dot) for ls in s.legs]
        raw = self.loop.step(angles, rates)
        out = []
        for leg, (pair, rate) in enumerate(zip(raw, rates)):
            limited = []
            for k in range(2):
                tau = clamp_torque(act, self.budgets[2 * leg + k], pair[k], s.t).torque
                tau = speed_limited_torque(act, tau, rate[k])
                limit = self.torque_limit if self.torque_limit is not None else self.loop.cfg.torque_limit
                if limit is not None:
                    tau = min(limit, max(-limit, tau))
                limited.append(tau)
            out.append((limited[0], limited[1]))
        return out

    def tick(self, s: SimState) -> SimState:
        torques = self.motor_torques(s)
        new = self.sim.step(s, torques)
        act = self.sim.act
        power = current = 0.0
        for ls, (t1, t2) in zip(s.legs, torques):
            for tau, w in ((t1, ls.phi1_dot), (t2, ls.phi2_dot)):
                p, _, i = electrical_power(tau / act.gain, w * act.ratio, act.motor)
                power += p
                current += i
        self.recorder.append(
            s.t, s.body,
            [(ls.phi1, ls.phi2) for ls in s.legs],
            torques,
            [ls.contact for ls in s.legs],
            self.sim.last_foot_force,
            power,
            current,
        )
        return new


# -- experiments ----------------------------------------------------------------

JUMP_CROUCH_GAINS = CompliancePdGains(kp_theta=10.0, kd_theta=0.3, kp_gamma=20.0, kd_gamma=0.6)
JUMP_EXTEND_GAINS = CompliancePdGains(kp_theta=20.0, kd_theta=0.3, kp_gamma=200.0, kd_gamma=0.5)


def _default_extend() -> LegCommand:
    return LegCommand(theta_d=0.0, gamma_d=0.3, gains=JUMP_EXTEND_GAINS)


@dataclass(frozen=True)
class JumpScript:
    crouch_gamma: float = 2.8
    hold: float = 0.5
    extend_command: LegCommand = field(default_factory=_default_extend)
    timeout: float = 3.0
    crouch_gains: CompliancePdGains = JUMP_CROUCH_GAINS

    def __post_init__(self):
        if not (0.0 < self.crouch_gamma < math.pi):
            raise ValueError("crouch_gamma must lie strictly inside (0, pi)")
        if self.timeout <= self.hold:
            raise ValueError("timeout must exceed hold")

    def command(self, t: float) -> list[LegCommand]:
        if t < self.hold:
            cmd = LegCommand(0.0, self.crouch_gamma, gains=self.crouch_gains)
        else:
            cmd = self.extend_command
        return [cmd] * 4


def simulate_jump(body: BodyParams, geom: LegGeometry, act: QddActuator,
                  script: JumpScript | None = None, cfg: TwoRateConfig | None = None,
                  seed: int = 0, torque_limit: float | None = None,
                  after_apex: float = 0.01) -> tuple[Trace, JumpResult]:
    """Crouch, extend, fly to apex; returns the trace and jump metrics.

    Raises NoTakeoff when the robot is still on the ground at ``timeout``.
    """
    script = script or JumpScript()
    cfg = cfg or TwoRateConfig()
    sim = Simulator(body, geom, act, dt=cfg.dt)
    run = ControlledRun(sim, TwoRateLoop(cfg, script.command, seed), torque_limit)
    s = standing_state(sim, script.crouch_gamma)
    n_max = int(round(script.timeout / cfg.dt))
    airborne = False
    apex_tick = None
    for k in range(n_max):
        prev_vz = s.vz
        s = run.tick(s)
        flying = not any(ls.contact for ls in s.legs)
        airborne = airborne or flying
        if flying and apex_tick is None and prev_vz > 0.0 >= s.vz:
            apex_tick = k
        if apex_tick is not None and (k - apex_tick) * cfg.dt >= after_apex:
            break
    if not airborne:
        raise NoTakeoff(f"no takeoff within {script.timeout:g} s; torque or gains too weak")
    trace = run.recorder.build()
    if apex_tick is None:
        raise NoTakeoff("robot left the ground but never reached an apex before timeout")
    # the extension command is latched at the first outer tick at or after hold
    period = 1.0 / cfg.outer_rate
    onset = math.ceil(script.hold / period - 1e-9) * period
    return trace, jump_result(trace, onset)


def simulate_run(body: BodyParams, geom: LegGeometry, act: QddActuator, gait: GaitParams,
                 duration: float, cfg: TwoRateConfig | None = None, seed: int = 0,
                 settle: float = 0.25, torque_limit: float | None = None,
                 check_strides: bool = True) -> tuple[Trace, RunResult]:
    """Stand for ``settle`` seconds, then run the gait open loop until ``duration``."""
    cfg = cfg or TwoRateConfig()
    if check_strides and duration < 10 * gait.period:
        raise ValueError(f"duration {duration:g} s covers fewer than 10 strides")
    sim = Simulator(body, geom, act, dt=cfg.dt)
    neutral = gamma_for_length(geom, gait.neutral_extension)
    stand = [LegCommand(0.0, neutral, gains=gait.stance_gains)] * 4

    def source(t: float):
        if t < settle:
            return stand
        return leg_commands(gait, geom, t - settle)

    run = ControlledRun(sim, TwoRateLoop(cfg, source, seed), torque_limit)
    s = standing_state(sim, neutral)
    n = int(round(duration / cfg.dt))
    for _ in range(n):
        s = run.tick(s)
        if s.z < FALL_HEIGHT or abs(s.pitch) > FALL_PITCH:
            raise FallDetected(f"fell at t={s.t:.3f}s (z={s.z:.3f} m, pitch={s.pitch:.3f} rad)")
    trace = run.recorder.build()
    return trace, run_result(trace, body.mass, body.gravity)


CommandSource = Callable[[float], Sequence[LegCommand]]


def simulate_hold(body: BodyParams, geom: LegGeometry, act: QddActuator,
                  source: CommandSource, state: SimState, duration: float,
                  cfg: TwoRateConfig | None = None) -> tuple[Trace, SimState, Simulator]:
    """Run an arbitrary command source from ``state``; used by stand/pressing tests."""
    cfg = cfg or TwoRateConfig()
    sim = Simulator(body, geom, act, dt=cfg.dt)
    run = ControlledRun(sim, TwoRateLoop(cfg, source))
    s = state
    for _ in range(int(round(duration / cfg.dt))):
        s = run.tick(s)
    return run.recorder.build(), s, sim
