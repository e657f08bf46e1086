import numpy as np
import pytest

from doggo_lab.trace import Trace, TraceRecorder, csv_columns, detect_events
from oracles import G, hop_track


def test_columns():
    cols = csv_columns()
    assert cols[:7] == ["t", "body_x", "body_z", "pitch", "body_vx", "body_vz", "pitch_rate"]
    assert cols[7:14] == ["phi1_0", "phi2_0", "tau1_0", "tau2_0", "contact_0", "fx_0", "fz_0"]
    assert cols[-2:] == ["power_w", "current_a"]
    assert len(cols) == 7 + 4 * 7 + 2


def test_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    n = 20
    rec = TraceRecorder()
    for k in range(n):
        rec.append(k * 1e-4, tuple(rng.normal(size=6)), rng.normal(size=(4, 2)).tolist(),
                   rng.normal(size=(4, 2)).tolist(), (rng.random(4) > 0.5).tolist(),
                   rng.normal(size=(4, 2)).tolist(), float(rng.random()), float(rng.random()))
    tr = rec.build()
    tr.to_csv(tmp_path / "a.csv")
    back = Trace.from_csv(tmp_path / "a.csv")
    assert np.allclose(back.to_array(), tr.to_array(), rtol=1e-9, atol=1e-12)
    assert np.array_equal(back.contact, tr.contact)


def test_csv_without_current_column(tmp_path):
    tr = Trace.from_body(np.arange(3) * 0.1, x=[0, 1, 2])
    arr = tr.to_array()[:, :-1]
    back = Trace.from_array(arr, csv_columns()[:-1])
    assert np.isnan(back.current).all()
    assert np.array_equal(back.x, [0, 1, 2])


def test_empty_recorder():
    assert len(TraceRecorder().build()) == 0
    assert detect_events(TraceRecorder().build()) == []


def test_ballistic_single_apex():
    dt, vz0 = 1e-3, 3.0
    t = np.arange(0, 0.6, dt)
    tr = Trace.from_body(t, z=1 + vz0 * t - 0.5 * G * t * t, vz=vz0 - G * t)
    events = detect_events(tr)
    assert [e.kind for e in events] == ["apex"]
    assert events[0].t == pytest.approx(vz0 / G, abs=dt)


def test_grounded_trace_has_no_events():
    t = np.arange(0, 1, 0.01)
    assert detect_events(Trace.from_body(t, z=0.2, contact=np.ones(len(t), bool))) == []


def test_hop_takeoff_recovered():
    dt, t_to, vz0 = 1e-3, 0.3137, 2.0
    t, z, vz, contact = hop_track(t_to, vz0, dt=dt)
    events = detect_events(Trace.from_body(t, z=z, vz=vz, contact=contact))
    kinds = [e.kind for e in events]
    assert kinds == ["takeoff", "apex", "touchdown"]
    assert events[0].t == pytest.approx(t_to, abs=dt)
    assert events[1].t == pytest.approx(t_to + vz0 / G, abs=dt)
    assert events[2].t == pytest.approx(t_to + 2 * vz0 / G, abs=dt)


def test_partial_contact_counts_as_grounded():
    t = np.arange(5) * 0.1
    contact = np.zeros((5, 4), bool)
    contact[:3, 0] = True
    contact[:2, 1:] = True
    events = detect_events(Trace.from_body(t, contact=contact))
    assert [(e.kind, round(e.t, 3)) for e in events] == [("takeoff", 0.25)]
