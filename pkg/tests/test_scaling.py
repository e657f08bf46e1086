import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from doggo_lab.actuator import QddActuator, load_actuator
from doggo_lab.scaling import (
    ReferenceMotor,
    dd_equivalent_mass_factor,
    fleet_mass_saving,
    inertia_ratio_for_torque,
    qdd_mass_budget,
    reflected_inertia_comparison,
    scale_with_radius,
    scaling_summary,
    torque_upgrade,
)

REF = ReferenceMotor(0.2126, 1.6, 2.889e-5)


def test_radius_scaling_examples():
    r = scale_with_radius(REF, 1.0)
    assert r.apply(REF) == REF
    r = scale_with_radius(REF, math.sqrt(3))
    assert (r.mass_factor, r.torque_factor, r.inertia_factor) == pytest.approx((1.732051, 3.0, 5.196152), rel=1e-6)
    assert scale_with_radius(REF, 1.3).mass_factor == 1.3


@given(st.floats(0.1, 10))
def test_radius_exponents(k):
    r = scale_with_radius(REF, k)
    assert r.torque_factor == pytest.approx(r.mass_factor ** 2)
    assert r.inertia_factor == pytest.approx(r.mass_factor ** 3)


@pytest.mark.parametrize("n,expected", [(1, 1.0), (3, 1.7320508), (4, 2.0)])
def test_dd_mass_factor(n, expected):
    assert dd_equivalent_mass_factor(n) == pytest.approx(expected, rel=1e-7)


def test_mass_budget():
    assert qdd_mass_budget(0.2126, 1.0).budget == 0.0
    b = qdd_mass_budget(0.2126, 3.0, 0.0574)
    assert b.budget == pytest.approx(0.1556, abs=5e-5)
    assert b.passes and b.margin == pytest.approx(0.0982, abs=5e-5)
    edge = (math.sqrt(3) - 1) * 0.2126
    assert qdd_mass_budget(0.2126, 3.0, edge).passes
    assert not qdd_mass_budget(0.2126, 3.0, edge + 1e-6).passes


@pytest.mark.parametrize("k,expected", [(1.0, 1.0), (1.8, 2.415), (4.0, 8.0)])
def test_inertia_ratio(k, expected):
    assert inertia_ratio_for_torque(k) == pytest.approx(expected, abs=5e-4)


def test_torque_upgrade_consistent_with_radius_scaling():
    up = torque_upgrade(1.8)
    r = scale_with_radius(REF, up.radius_factor)
    assert r.torque_factor == pytest.approx(1.8)
    assert r.inertia_factor == pytest.approx(up.inertia_factor)


def test_fleet_saving():
    doggo = load_actuator("doggo")
    saving = fleet_mass_saving(doggo, 8)
    # oracle: 8 * (sqrt(3) * 0.2126 - (0.2126 + 0.0574))
    assert saving == pytest.approx(0.785872, abs=1e-6)
    assert saving / 4.8 == pytest.approx(0.164, abs=0.001)
    m = doggo.motor
    dd = QddActuator(m, ratio=1.0, transmission_mass=0.05)
    assert fleet_mass_saving(dd, 8) == pytest.approx(-8 * 0.05)


def test_inertia_comparison_only_agrees_for_direct_drive():
    doggo = load_actuator("doggo")
    cmp = reflected_inertia_comparison(doggo)
    assert cmp["qdd_over_dd"] == pytest.approx(math.sqrt(3))
    dd = QddActuator(doggo.motor, ratio=1.0)
    c1 = reflected_inertia_comparison(dd)
    assert c1["qdd_reflected_inertia"] == c1["dd_equivalent_inertia"]


def test_summary_fields():
    s = scaling_summary(load_actuator("doggo"), 8, 4.8)
    assert s["mass_factor"] == pytest.approx(1.732, abs=5e-4)
    assert round(s["dd_heavier_pct"]) == 73
    assert s["budget_passes"] is True
    assert s["fleet_saving_pct_of_robot"] == pytest.approx(16.4, abs=0.05)
