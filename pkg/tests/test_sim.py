import math
from dataclasses import replace

import numpy as np
import pytest

from doggo_lab.actuator import load_actuator
from doggo_lab.control import LegCommand
from doggo_lab.errors import FallDetected, NoTakeoff, NumericalDivergence
from doggo_lab.gait import DEFAULT_STANCE_GAINS, GaitParams
from doggo_lab.kinematics import LegGeometry, gamma_for_length
from doggo_lab.sim import (
    BodyParams,
    JumpScript,
    LegState,
    Simulator,
    ballistic_state,
    simulate_hold,
    simulate_jump,
    simulate_run,
    standing_state,
)
from doggo_lab.trace import detect_events
from oracles import ballistic_rise

BODY, GEOM = BodyParams(), LegGeometry()
ACT = load_actuator("doggo")
ZERO = [(0.0, 0.0)] * 4


@pytest.fixture(scope="module")
def jump():
    return simulate_jump(BODY, GEOM, ACT)


def body_energy(trace, k):
    x, z, q, vx, vz, w = trace.body[k]
    return 0.5 * BODY.mass * (vx * vx + vz * vz) + 0.5 * BODY.pitch_inertia * w * w + BODY.mass * BODY.gravity * z


def test_ballistic_velocity_exact():
    sim = Simulator(BODY, GEOM, ACT)
    s = ballistic_state(2.0, 0.3, 1.5)
    for _ in range(1000):
        s = sim.step(s, ZERO)
    assert s.vz == pytest.approx(1.5 - BODY.gravity * 0.1, abs=1e-12)
    assert s.vx == 0.3 and s.pitch == 0.0


def test_ballistic_apex():
    sim = Simulator(BODY, GEOM, ACT)
    s = ballistic_state(1.0, 0.0, 3.0)
    z_max = s.z
    while s.vz > -0.1:
        s = sim.step(s, ZERO)
        z_max = max(z_max, s.z)
    assert z_max - 1.0 == pytest.approx(ballistic_rise(3.0), rel=5e-3)


def quiescent_stand(duration=1.0):
    gamma = gamma_for_length(GEOM, 0.18)
    start = standing_state(Simulator(BODY, GEOM, ACT), gamma)
    cmd = [LegCommand(0.0, gamma, gains=DEFAULT_STANCE_GAINS)] * 4
    return simulate_hold(BODY, GEOM, ACT, lambda t: cmd, start, duration)


def test_quiescent_stand_supports_weight():
    _, s, sim = quiescent_stand()
    total = sum(fz for _, fz in sim.last_grf)
    assert total == pytest.approx(BODY.mass * BODY.gravity, rel=1e-3)
    assert abs(s.vz) < 1e-6 and all(ls.contact for ls in s.legs)


def test_single_leg_at_singularity_stays_finite():
    sim = Simulator(BODY, GEOM, ACT)
    s = standing_state(sim, 1e-7)
    legs = [s.legs[0]] + [LegState(1.2, -1.2)] * 3
    s = replace(s, legs=tuple(legs))
    for _ in range(2000):
        s = sim.step(s, [(1.0, 1.0)] + ZERO[1:])
        values = [s.z, s.vz, s.pitch, *sim.last_grf[0], *sim.last_foot_force[0]]
        assert all(map(math.isfinite, values))
        assert math.hypot(*sim.last_grf[0]) < 100 * BODY.mass * BODY.gravity


def test_divergence_is_reported():
    sim = Simulator(BODY, GEOM, ACT)
    with pytest.raises(NumericalDivergence):
        sim.step(ballistic_state(0.5, 60.0, 0.0), ZERO)


def test_touchdown_anchor_on_ground():
    sim = Simulator(BODY, GEOM, ACT)
    s = ballistic_state(0.3, 0.2, 0.0, gamma=0.8)
    while not any(ls.contact for ls in s.legs):
        s = sim.step(s, ZERO)
    for leg, ls in enumerate(s.legs):
        if ls.contact:
            assert ls.anchor_z == 0.0
            assert sim.foot_world(s, leg)[1] == pytest.approx(0.0, abs=1e-3)


def test_jump_reaches_apex_and_metrics_consistent(jump):
    trace, res = jump
    assert res.h > 0.6
    assert res.agility == res.h / (res.t_stance + res.t_apogee)
    kinds = [e.kind for e in detect_events(trace)]
    assert kinds[:2] == ["takeoff", "apex"]


def test_jump_energy_audit(jump):
    trace, _ = jump
    k0 = int(np.searchsorted(trace.t, JumpScript().hold - 1e-9))
    k_to = int(np.nonzero(trace.any_contact)[0][-1]) + 1
    dphi = np.diff(trace.phi, axis=0)
    work = ((trace.tau[:-1] * dphi).sum(axis=2) * trace.contact[:-1])[k0:k_to].sum()
    gained = body_energy(trace, k_to) - body_energy(trace, k0)
    assert abs(work - gained) / work < 0.01


def test_jump_apex_matches_takeoff_velocity(jump):
    trace, _ = jump
    k_to = int(np.nonzero(trace.any_contact)[0][-1]) + 1
    rise = trace.z[k_to:].max() - trace.z[k_to]
    assert rise == pytest.approx(ballistic_rise(trace.vz[k_to], BODY.gravity), rel=5e-3)


def test_jump_is_symmetric(jump):
    trace, _ = jump
    assert np.max(np.abs(trace.body[:, 2])) < 1e-6


def test_zero_torque_jump():
    with pytest.raises(NoTakeoff):
        simulate_jump(BODY, GEOM, ACT, torque_limit=0.0)


def test_jump_deterministic(jump):
    again, res = simulate_jump(BODY, GEOM, ACT)
    assert np.array_equal(again.to_array(), jump[0].to_array())
    assert res == jump[1]


def test_stepping_in_place():
    trace, res = simulate_run(BODY, GEOM, ACT, GaitParams(stride_length=0.0), 2.5)
    assert abs(res.mean_velocity) < 0.02


def test_longer_stride_is_faster():
    v = [simulate_run(BODY, GEOM, ACT, GaitParams(stride_length=s), 2.5)[1].mean_velocity
         for s in (0.05, 0.10)]
    assert 0 < v[0] < v[1]


def test_run_duration_checked():
    with pytest.raises(ValueError, match="10 strides"):
        simulate_run(BODY, GEOM, ACT, GaitParams(), 1.0)


def test_fall_detected():
    small = LegGeometry(0.03, 0.07)
    gait = GaitParams(stride_length=0.01, step_height=0.005, stance_dip=0.002,
                      neutral_extension=0.07, geometry=small)
    with pytest.raises(FallDetected):
        simulate_run(BODY, small, ACT, gait, 2.0, torque_limit=0.0)
