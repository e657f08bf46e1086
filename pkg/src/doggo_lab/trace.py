"""Uniformly sampled simulation records and their CSV form."""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

BODY_COLUMNS = ("body_x", "body_z", "pitch", "body_vx", "body_vz", "pitch_rate")
LEG_COLUMNS = ("phi1", "phi2", "tau1", "tau2", "contact", "fx", "fz")
N_LEGS = 4


def csv_columns() -> list[str]:
    cols = ["t", *BODY_COLUMNS]
    for leg in range(N_LEGS):
        cols += [f"{name}_{leg}" for name in LEG_COLUMNS]
    return cols + ["power_w", "current_a"]


@dataclass
class Trace:
    """Time series of one simulated experiment.

    Shapes: ``body`` (n, 6); ``phi``, ``tau``, ``force`` (n, 4, 2); ``contact``
    (n, 4); ``power`` and ``current`` (n,). Torques are output-side, forces are
    the current-based foot force estimates in the hip frame, ``current`` is the
    summed motor current magnitude.
    """

    t: np.ndarray
    body: np.ndarray
    phi: np.ndarray
    tau: np.ndarray
    contact: np.ndarray
    force: np.ndarray
    power: np.ndarray
    current: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0

    @property
    def x(self) -> np.ndarray:
        return self.body[:, 0]

    @property
    def z(self) -> np.ndarray:
        return self.body[:, 1]

    @property
    def vz(self) -> np.ndarray:
        return self.body[:, 4]

    @property
    def any_contact(self) -> np.ndarray:
        return self.contact.any(axis=1)

    @classmethod
    def from_body(cls, t, x=None, z=None, vz=None, contact=None, vx=None) -> "Trace":
        """Minimal trace from body channels; anything omitted is zero."""
        t = np.asarray(t, dtype=float)
        n = len(t)

        def chan(v):
            return np.zeros(n) if v is None else np.broadcast_to(np.asarray(v, dtype=float), (n,))

        body = np.column_stack([chan(x), chan(z), np.zeros(n), chan(vx), chan(vz), np.zeros(n)])
        if contact is None:
            contact = np.zeros((n, N_LEGS), bool)
        else:
            contact = np.asarray(contact, dtype=bool)
            if contact.ndim == 1:
                contact = np.repeat(contact[:, None], N_LEGS, axis=1)
        zeros2 = np.zeros((n, N_LEGS, 2))
        return cls(t, body, zeros2, zeros2.copy(), contact, zeros2.copy(), np.zeros(n), np.zeros(n))

    def window(self, start: int, stop: int | None = None) -> "Trace":
        sl = slice(start, stop)
        return Trace(*(getattr(self, f)[sl] for f in self.__dataclass_fields__))

    def to_array(self) -> np.ndarray:
        n = len(self)
        legs = np.concatenate(
            [self.phi, self.tau, self.contact[:, :, None].astype(float), self.force], axis=2
        ).reshape(n, N_LEGS * len(LEG_COLUMNS))
        return np.column_stack([self.t, self.body, legs, self.power, self.current])

    def to_csv(self, path: str | Path) -> None:
        buf = io.StringIO()
        np.savetxt(buf, self.to_array(), fmt="%.10g", delimiter=",",
                   header=",".join(csv_columns()), comments="")
        Path(path).write_text(buf.getvalue())

    @classmethod
    def from_array(cls, data: np.ndarray, columns: list[str] | None = None) -> "Trace":
        columns = columns or csv_columns()
        idx = {name: i for i, name in enumerate(columns)}

        def col(name, default=0.0):
            return data[:, idx[name]] if name in idx else np.full(len(data), default)

        def legs(name):
            return np.stack([col(f"{name}_{leg}") for leg in range(N_LEGS)], axis=1)

        return cls(
            t=col("t"),
            body=np.column_stack([col(name) for name in BODY_COLUMNS]),
            phi=np.stack([legs("phi1"), legs("phi2")], axis=2),
            tau=np.stack([legs("tau1"), legs("tau2")], axis=2),
            contact=legs("contact") > 0.5,
            force=np.stack([legs("fx"), legs("fz")], axis=2),
            power=col("power_w"),
            current=col("current_a", np.nan),
        )

    @classmethod
    def from_csv(cls, path: str | Path) -> "Trace":
        with open(path) as fh:
            header = fh.readline().strip().split(",")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls.from_array(data, header)


class TraceRecorder:
    def __init__(self):
        self._rows: list[tuple] = []

    def append(self, t, body, phi, tau, contact, force, power, current):
        self._rows.append((t, body, phi, tau, contact, force, power, current))

    def __len__(self) -> int:
        return len(self._rows)

    def build(self) -> Trace:
        if not self._rows:
            empty2 = np.zeros((0, N_LEGS, 2))
            return Trace(np.zeros(0), np.zeros((0, 6)), empty2, empty2.copy(),
                         np.zeros((0, N_LEGS), bool), empty2.copy(), np.zeros(0), np.zeros(0))
        t, body, phi, tau, contact, force, power, current = zip(*self._rows)
        return Trace(
            t=np.array(t),
            body=np.array(body, dtype=float),
            phi=np.array(phi, dtype=float),
            tau=np.array(tau, dtype=float),
            contact=np.array(contact, dtype=bool),
            force=np.array(force, dtype=float),
            power=np.array(power, dtype=float),
            current=np.array(current, dtype=float),
        )


class Event(NamedTuple):
    t: float
    kind: str  # "takeoff" | "touchdown" | "apex"


def detect_events(trace: Trace) -> list[Event]:
    """Whole-body takeoff/touchdown and flight apex times.

    Takeoff is the instant the last foot leaves the ground, touchdown the
    instant the first foot lands. Contact switches are placed midway between
    the bracketing samples; the apex is where vertical velocity crosses zero
    downward during full flight, linearly interpolated.
    """
    t = trace.t
    if len(t) < 2:
        return []
    grounded = trace.any_contact
    vz = trace.vz
    events = []
    for k in range(1, len(t)):
        if grounded[k - 1] and not grounded[k]:
            events.append(Event(0.5 * (t[k - 1] + t[k]), "takeoff"))
        elif not grounded[k - 1] and grounded[k]:
            events.append(Event(0.5 * (t[k - 1] + t[k]), "touchdown"))
        elif not grounded[k - 1] and not grounded[k] and vz[k - 1] > 0.0 >= vz[k]:
            frac = vz[k - 1] / (vz[k - 1] - vz[k])
            events.append(Event(t[k - 1] + frac * (t[k] - t[k - 1]), "apex"))
    return [Event(float(e.t), e.kind) for e in events]
