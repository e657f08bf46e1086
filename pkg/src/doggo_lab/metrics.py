"""Locomotion performance metrics and the published comparison fixtures."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from decimal import Decimal
from importlib import resources

import numpy as np

from .actuator import MotorParams
from .errors import DomainError, InsufficientTravel, NoJumpDetected
from .trace import Trace, detect_events

GRAVITY = 9.81
STEADY_DISTANCE = 0.7
TRANSIENT_FRACTION = 0.25
SIM_ROW_LABEL = "doggo-lab (sim)"


@dataclass(frozen=True)
class RunResult:
    v_ss: float | None
    mean_voltage: float
    mean_current: float
    cost_of_transport: float | None
    mean_velocity: float = 0.0
    distance: float = 0.0


@dataclass(frozen=True)
class JumpResult:
    h: float
    t_stance: float
    t_apogee: float
    agility: float


def cost_of_transport(voltage: float, current: float, mass: float, v_ss: float,
                      g: float = GRAVITY) -> float:
    if mass <= 0 or v_ss <= 0 or g <= 0:
        raise DomainError("mass, steady velocity and gravity must all be positive")
    return voltage * current / (mass * g * v_ss)


def vertical_jumping_agility(h: float, t_stance: float, t_apogee: float) -> float:
    total = t_stance + t_apogee
    if total <= 0:
        raise DomainError("stance time plus time to apogee must be positive")
    return h / total


def electrical_power(tau_motor: float, omega_motor: float, motor: MotorParams):
    """(power W, voltage V, current A) drawn by one motor.

    Mechanical power plus copper loss; regeneration is not credited, so the
    power is floored at zero.
    """
    current = abs(tau_motor) / motor.k_t
    power = max(0.0, tau_motor * omega_motor + current * current * motor.winding_resistance)
    voltage = power / current if current > 0 else 0.0
    return power, voltage, current


def _post_transient_start(t: np.ndarray, discard: float) -> int:
    t_cut = t[0] + discard * (t[-1] - t[0])
    return int(np.searchsorted(t, t_cut, side="left"))


def steady_velocity(trace: Trace, distance: float = STEADY_DISTANCE,
                    discard: float = TRANSIENT_FRACTION) -> float:
    """Average speed over the first ``distance`` metres after the transient."""
    t, x = trace.t, trace.x
    if len(t) < 2:
        raise InsufficientTravel("trace too short")
    s = _post_transient_start(t, discard)
    travel = x[s:] - x[s]
    hit = np.nonzero(travel >= distance)[0]
    if hit.size == 0:
        raise InsufficientTravel(
            f"only {travel.max(initial=0.0):.3f} m travelled after the transient, need {distance} m"
        )
    k = s + int(hit[0])
    if k == s:
        raise InsufficientTravel("distance must be positive")
    # interpolate the crossing inside [k-1, k]
    d0, d1 = travel[k - 1 - s], travel[k - s]
    frac = (distance - d0) / (d1 - d0)
    t_hit = t[k - 1] + frac * (t[k] - t[k - 1])
    return distance / (t_hit - t[s])


def _first_jump(trace: Trace):
    events = detect_events(trace)
    takeoff = next((e for e in events if e.kind == "takeoff"), None)
    if takeoff is None:
        raise NoJumpDetected("no takeoff in trace")
    apex = next((e for e in events if e.kind == "apex" and e.t > takeoff.t), None)
    if apex is None:
        raise NoJumpDetected("no apex after takeoff")
    landing = next((e for e in events if e.kind == "touchdown" and e.t > takeoff.t), None)
    return takeoff, apex, landing


def jump_height(trace: Trace) -> float:
    """Apex CoG height minus the crouched (lowest pre-takeoff) CoG height."""
    takeoff, apex, _ = _first_jump(trace)
    t, z = trace.t, trace.z
    z_crouch = z[t < takeoff.t].min()
    # the apex event sits between two samples; take the higher of them
    k = int(np.searchsorted(t, apex.t))
    z_apex = z[max(k - 1, 0):k + 1].max()
    return float(z_apex - z_crouch)


def jump_result(trace: Trace, onset: float | None = None) -> JumpResult:
    """Jump metrics from a trace.

    ``onset`` is when the extension command started. Without it the onset is
    taken as the last sample still within 1 mm of the crouch height.
    """
    takeoff, apex, _ = _first_jump(trace)
    h = jump_height(trace)
    if onset is None:
        pre = trace.t < takeoff.t
        z_pre = trace.z[pre]
        still = np.nonzero(z_pre <= z_pre.min() + 1e-3)[0]
        onset = float(trace.t[pre][still[-1]])
    t_stance = takeoff.t - onset
    t_apogee = apex.t - takeoff.t
    return JumpResult(h, t_stance, t_apogee, vertical_jumping_agility(h, t_stance, t_apogee))


def run_result(trace: Trace, mass: float, g: float = GRAVITY,
               distance: float = STEADY_DISTANCE, discard: float = TRANSIENT_FRACTION) -> RunResult:
    """Run metrics over the post-transient part of ``trace``.

    Voltage is reported so that mean voltage times mean current equals the
    mean electrical power. When the run covers less than ``distance`` the
    steady velocity and cost of transport are None.
    """
    s = _post_transient_start(trace.t, discard)
    t, x = trace.t[s:], trace.x[s:]
    elapsed = t[-1] - t[0] if len(t) > 1 else 0.0
    mean_velocity = (x[-1] - x[0]) / elapsed if elapsed > 0 else 0.0
    mean_power = float(np.mean(trace.power[s:]))
    mean_current = float(np.mean(trace.current[s:]))
    mean_voltage = mean_power / mean_current if mean_current > 0 else 0.0
    try:
        v = float(steady_velocity(trace, distance, discard))
    except InsufficientTravel:
        v, cot = None, None
    else:
        cot = float(cost_of_transport(mean_voltage, mean_current, mass, v, g))
    return RunResult(v, mean_voltage, mean_current, cot, float(mean_velocity),
                     float(x[-1] - x[0]) if len(x) else 0.0)


# -- fixtures -------------------------------------------------------------

TABLE_COLUMNS = {
    "I": [("robot", "Robot"), ("actuator", "Actuator"), ("cost", "Cost"),
          ("speed_reduction", "Speed Reduction"), ("mass", "Mass (kg)"),
          ("continuous_torque", "Continuous Torque (Nm)"), ("peak_torque", "Peak Torque (Nm)"),
          ("max_continuous_power", "Max Continuous Power (W)"),
          ("reflected_inertia", "Reflected Inertia (kg m^2)")],
    "II": [("name", "Robot"), ("legs", "Legs"), ("dof", "DOF"),
           ("leg_length", "Leg Length (m)"), ("mass", "Mass (kg)"),
           ("motor_mass_pct", "Mass From Motors (%)"), ("gear_ratio", "Gear Ratio")],
    "III": [("name", "Robot"), ("v_ss", "Steady Velocity (m/s)"),
            ("cot", "Cost of Transport"), ("jump_h", "Maximum Jump Height (m)"),
            ("agility", "Vertical Jumping Agility (m/s)")],
}


@dataclass(frozen=True)
class RobotFixture:
    name: str
    legs: int | None = None
    dof: int | None = None
    leg_length: Decimal | None = None
    mass: Decimal | None = None
    motor_mass_pct: Decimal | None = None
    gear_ratio: Decimal | None = None
    v_ss: Decimal | None = None
    cot: Decimal | None = None
    jump_h: Decimal | None = None
    agility: Decimal | None = None

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name != "name" and value is not None and value <= 0:
                raise ValueError(f"{self.name}: {f.name} must be positive")

    def value(self, key: str) -> float | None:
        v = getattr(self, key)
        return None if v is None else float(v)


def fixture_text() -> str:
    return resources.files("doggo_lab").joinpath("data/robots.json").read_text()


def load_fixture_data() -> dict:
    # Decimal keeps the printed digits ("0.160", "0.50") intact
    return json.loads(fixture_text(), parse_float=Decimal)


def load_robot_fixtures() -> list[RobotFixture]:
    return [RobotFixture(**row) for row in load_fixture_data()["robots"]]


def load_actuator_table() -> list[dict]:
    return load_fixture_data()["actuators"]


def _cell(value) -> str:
    if value is None:
        return "N/A"
    if isinstance(value, float):
        return f"{value:.3g}" if abs(value) < 100 else f"{value:.0f}"
    return str(value)


def render_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    line = " | ".join(h.ljust(w) for h, w in zip(headers, widths))
    out = [line, "-+-".join("-" * w for w in widths)]
    out += [" | ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(out)


def table_rows(table: str, fixtures=None, computed: dict | None = None) -> tuple[list[str], list[list[str]]]:
    cols = TABLE_COLUMNS[table]
    if table == "I":
        records = list(fixtures) if fixtures is not None else load_actuator_table()
        rows = [[_cell(rec.get(key)) for key, _ in cols] for rec in records]
    else:
        records = list(fixtures) if fixtures is not None else load_robot_fixtures()
        rows = [[_cell(getattr(rec, key)) for key, _ in cols] for rec in records]
    if computed:
        row = [SIM_ROW_LABEL] + [_cell(computed.get(key)) for key, _ in cols[1:]]
        rows.append(row)
    return [h for _, h in cols], rows


def comparison_table(fixtures=None, computed: dict | None = None, table: str = "III") -> str:
    """Render one of the comparison tables; ``computed`` adds a sim row.

    ``computed`` maps column keys (e.g. ``v_ss``, ``cot``, ``jump_h``,
    ``agility``) to values; missing keys render as N/A.
    """
    headers, rows = table_rows(table, fixtures, computed)
    return render_table(headers, rows)


def computed_row(run: RunResult | None = None, jump: JumpResult | None = None) -> dict:
    row = {}
    if run is not None:
        row.update(v_ss=run.v_ss, cot=run.cost_of_transport)
    if jump is not None:
        row.update(jump_h=jump.h, agility=jump.agility)
    return row
