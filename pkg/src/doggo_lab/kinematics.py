"""Symmetric five-bar leg with coaxial hips.

Coordinates
-----------
Motor angles ``phi1 >= phi2`` are measured from the straight-down ray,
positive toward the body's forward direction. The virtual leg is the
hip->foot ray: ``theta`` is its angle from straight down and ``gamma`` is
the half-angle between the two upper links::

    theta = (phi1 + phi2) / 2
    gamma = (phi1 - phi2) / 2

The foot sits at ``(r sin theta, -r cos theta)`` in the hip frame (x forward,
z up) with ``r(gamma) = l1 cos gamma + sqrt(l2^2 - l1^2 sin^2 gamma)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularConfiguration, UnreachableTarget

# condition number above which J^-T is treated as meaningless
SINGULAR_CONDITION = 1e8


@dataclass(frozen=True)
class LegGeometry:
    l1: float = 0.085
    l2: float = 0.165

    def __post_init__(self):
        if not (0.0 < self.l1 < self.l2):
            raise ValueError(f"need 0 < l1 < l2, got l1={self.l1}, l2={self.l2}")

    @property
    def r_min(self) -> float:
        return self.l2 - self.l1

    @property
    def r_max(self) -> float:
        return self.l1 + self.l2


@dataclass(frozen=True)
class MotorAngles:
    phi1: float
    phi2: float


@dataclass(frozen=True)
class VirtualLegState:
    theta: float
    gamma: float


@dataclass(frozen=True)
class FootPosition:
    x: float
    z: float

    def __iter__(self):
        yield self.x
        yield self.z

    @property
    def norm(self) -> float:
        return math.hypot(self.x, self.z)


def leg_length(geom: LegGeometry, gamma: float) -> float:
    l1, l2 = geom.l1, geom.l2
    s = math.sin(gamma)
    return l1 * math.cos(gamma) + math.sqrt(l2 * l2 - l1 * l1 * s * s)


def leg_length_rate(geom: LegGeometry, gamma: float) -> float:
    """dr/dgamma; zero at gamma in {0, pi}, negative in between."""
    l1, l2 = geom.l1, geom.l2
    s, c = math.sin(gamma), math.cos(gamma)
    return -l1 * s - l1 * l1 * s * c / math.sqrt(l2 * l2 - l1 * l1 * s * s)


def to_virtual(a: MotorAngles) -> VirtualLegState:
    return VirtualLegState(0.5 * (a.phi1 + a.phi2), 0.5 * (a.phi1 - a.phi2))


def to_motor(s: VirtualLegState) -> MotorAngles:
    return MotorAngles(s.theta + s.gamma, s.theta - s.gamma)


# the transform is its own operation in the public surface
motor_virtual_transform = to_virtual
virtual_motor_transform = to_motor


def forward_kinematics(geom: LegGeometry, s: VirtualLegState) -> FootPosition:
    r = leg_length(geom, s.gamma)
    return FootPosition(r * math.sin(s.theta), -r * math.cos(s.theta))


def gamma_for_length(geom: LegGeometry, r: float) -> float:
    """Law of cosines on the hip-knee-foot triangle."""
    if not (geom.r_min - 1e-12 <= r <= geom.r_max + 1e-12):
        raise UnreachableTarget(
            f"leg length {r:.6f} m outside [{geom.r_min:.3f}, {geom.r_max:.3f}] m"
        )
    l1, l2 = geom.l1, geom.l2
    c = (l1 * l1 + r * r - l2 * l2) / (2.0 * l1 * r)
    return math.acos(min(1.0, max(-1.0, c)))


def inverse_kinematics(geom: LegGeometry, p: FootPosition) -> VirtualLegState:
    x, z = p
    r = math.hypot(x, z)
    gamma = gamma_for_length(geom, r)
    return VirtualLegState(math.atan2(x, -z), gamma)


def jacobian_entries(geom: LegGeometry, theta: float, gamma: float):
    """Return (dx/dphi1, dx/dphi2, dz/dphi1, dz/dphi2) as plain floats."""
    r = leg_length(geom, gamma)
    dr = leg_length_rate(geom, gamma)
    st, ct = math.sin(theta), math.cos(theta)
    dx_dth, dx_dg = r * ct, dr * st
    dz_dth, dz_dg = r * st, -dr * ct
    return (
        0.5 * (dx_dth + dx_dg),
        0.5 * (dx_dth - dx_dg),
        0.5 * (dz_dth + dz_dg),
        0.5 * (dz_dth - dz_dg),
    )


def jacobian(geom: LegGeometry, a: MotorAngles) -> np.ndarray:
    """Analytic d(x, z)/d(phi1, phi2)."""
    s = to_virtual(a)
    j11, j12, j21, j22 = jacobian_entries(geom, s.theta, s.gamma)
    return np.array([[j11, j12], [j21, j22]])


def condition_2x2(j11: float, j12: float, j21: float, j22: float) -> float:
    """2-norm condition number from the closed-form singular values."""
    fro2 = j11 * j11 + j12 * j12 + j21 * j21 + j22 * j22
    det = abs(j11 * j22 - j12 * j21)
    if det == 0.0:
        return math.inf
    disc = math.sqrt(max(0.0, fro2 * fro2 - 4.0 * det * det))
    s_max2 = 0.5 * (fro2 + disc)
    s_min2 = det * det / s_max2
    return math.sqrt(s_max2 / s_min2)


def foot_force_from_torques(J, tau) -> np.ndarray:
    """F = J^-T tau: force the foot exerts on its surroundings."""
    J = np.asarray(J, dtype=float)
    if condition_2x2(J[0, 0], J[0, 1], J[1, 0], J[1, 1]) >= SINGULAR_CONDITION:
        raise SingularConfiguration(
            "leg Jacobian is singular (gamma near 0 or pi); force estimate undefined"
        )
    return np.linalg.solve(J.T, np.asarray(tau, dtype=float))


def torques_from_foot_force(J, force) -> np.ndarray:
    return np.asarray(J, dtype=float).T @ np.asarray(force, dtype=float)


def workspace(geom: LegGeometry) -> tuple[float, float]:
    return geom.r_min, geom.r_max


def check_suite(geom: LegGeometry | None = None, samples: int = 100_000, seed: int = 0,
                fd_step: float = 1e-6) -> dict:
    """Property checks over random leg states.

    Returns the workspace bounds, the worst FK/IK roundtrip error (m), the
    worst relative Jacobian error against central differences on
    gamma in [0.05, pi - 0.05], and |det J| at the two singular poses.
    """
    geom = geom or LegGeometry()
    rng = np.random.default_rng(seed)
    r = rng.uniform(geom.r_min, geom.r_max, samples)
    th = rng.uniform(-math.pi, math.pi, samples)
    worst_roundtrip = 0.0
    for ri, ti in zip(r.tolist(), th.tolist()):
        p = FootPosition(ri * math.sin(ti), -ri * math.cos(ti))
        q = forward_kinematics(geom, inverse_kinematics(geom, p))
        worst_roundtrip = max(worst_roundtrip, math.hypot(q.x - p.x, q.z - p.z))

    n_jac = max(1, samples // 10)
    gam = rng.uniform(0.05, math.pi - 0.05, n_jac)
    th = rng.uniform(-math.pi, math.pi, n_jac)
    worst_jac = 0.0
    for g, t in zip(gam.tolist(), th.tolist()):
        a = to_motor(VirtualLegState(t, g))
        J = jacobian(geom, a)
        worst_jac = max(worst_jac, np.linalg.norm(J - fd_jacobian(geom, a, fd_step)) / np.linalg.norm(J))

    dets = [abs(np.linalg.det(jacobian(geom, to_motor(VirtualLegState(0.3, g)))))
            for g in (0.0, math.pi)]
    return {
        "r_min": geom.r_min,
        "r_max": geom.r_max,
        "roundtrip_max_error": worst_roundtrip,
        "jacobian_max_rel_error": float(worst_jac),
        "det_at_singularities": [float(d) for d in dets],
    }


def fd_jacobian(geom: LegGeometry, a: MotorAngles, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of the foot position in motor angles."""
    cols = []
    for d1, d2 in ((h, 0.0), (0.0, h)):
        plus = forward_kinematics(geom, to_virtual(MotorAngles(a.phi1 + d1, a.phi2 + d2)))
        minus = forward_kinematics(geom, to_virtual(MotorAngles(a.phi1 - d1, a.phi2 - d2)))
        cols.append([(plus.x - minus.x) / (2 * h), (plus.z - minus.z) / (2 * h)])
    return np.array(cols).T
