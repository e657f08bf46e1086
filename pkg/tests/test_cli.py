import csv
import json
import subprocess
import sys

import pytest

from doggo_lab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_kin_check(capsys):
    code, out, _ = run(capsys, "kin", "check", "--samples", "2000")
    assert code == 0
    assert "r_min = 0.080 m" in out and "r_max = 0.250 m" in out
    assert "FAIL" not in out


def test_scaling_ratio_three(capsys):
    code, out, _ = run(capsys, "scaling", "--ratio", "3")
    assert code == 0
    assert "1.732 (73% heavier)" in out
    assert "0.1556 = (sqrt(3) - 1) * m" in out
    assert "PASS" in out


def test_scaling_json(capsys):
    code, out, _ = run(capsys, "scaling", "--json", "--count", "8")
    data = json.loads(out)
    assert data["fleet_mass_saving"] == pytest.approx(0.786, abs=1e-3)


def test_scaling_fixture_file(capsys, tmp_path):
    path = tmp_path / "act.json"
    path.write_text(json.dumps({"k_t": 0.05, "mass": 0.3, "rotor_inertia": 5e-5,
                                "continuous_torque": 1, "peak_torque": 2,
                                "winding_resistance": 0.2, "max_speed": 300,
                                "ratio": 4, "transmission_mass": 0.4}))
    code, out, _ = run(capsys, "scaling", "--fixture", str(path))
    assert code == 0 and "FAIL" in out


def test_scaling_bad_fixture(capsys):
    code, _, err = run(capsys, "scaling", "--actuator", "nope")
    assert code == 1 and "available" in err


def test_bandwidth_pole(capsys):
    code, out, _ = run(capsys, "bandwidth", "--pole", "150", "--json")
    assert code == 0
    assert json.loads(out)["crossover_hz"] == pytest.approx(150, rel=0.05)


def test_bandwidth_csv_no_crossover(capsys, tmp_path):
    path = tmp_path / "resp.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["freq_hz", "gain", "phase_rad"])
        for f in (5, 10, 20, 40):
            w.writerow([f, 0.99, -0.1])
    code, out, _ = run(capsys, "bandwidth", "--input", str(path))
    assert code == 0
    assert ">= 40.00 Hz" in out


def test_bandwidth_needs_a_source(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bandwidth"])
    assert exc.value.code == 64


def test_gait_preview_csv(capsys):
    code, out, _ = run(capsys, "gait", "preview", "--gait", "pronk", "--csv", "--duration", "0.02")
    rows = list(csv.reader(out.splitlines()))
    assert code == 0
    assert rows[0] == ["t", "leg", "phase", "x", "z", "theta_d", "gamma_d"]
    assert len(rows) == 1 + 3 * 4
    assert len({tuple(r[2:]) for r in rows[1:5]}) == 1


def test_gait_preview_config(capsys, tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"preset": "walk", "stride_length": 0.06}))
    code, out, _ = run(capsys, "gait", "preview", "--config", str(path))
    assert code == 0 and len(out.splitlines()) > 10
    path.write_text(json.dumps({"stride_length": 0.9}))
    code, _, err = run(capsys, "gait", "preview", "--config", str(path))
    assert code == 1 and "workspace" in err


def test_compare_tables(capsys):
    code, out, _ = run(capsys, "compare")
    assert code == 0
    assert "Table I" in out and "Table II" in out and "Table III" in out
    assert "Stanford Doggo | 0.9" in out


def test_sim_jump_metrics_compare(capsys, tmp_path):
    prefix = str(tmp_path / "jump")
    code, out, _ = run(capsys, "sim", "jump", "--output", prefix)
    assert code == 0 and "agility" in out
    code, out, _ = run(capsys, "metrics", "--trace", prefix + ".trace.csv", "--json")
    metrics = json.loads(out)
    assert metrics["jump"]["h"] > 0.6
    assert metrics["run"]["v_ss"] is None
    code, out, _ = run(capsys, "compare", "--table", "III", "--report", prefix + ".report.json")
    last = [c.strip() for c in out.splitlines()[-1].split(" | ")]
    assert last[0] == "doggo-lab (sim)" and last[1] == "N/A"
    assert float(last[3]) > 0.6


def test_sim_zero_torque(capsys, tmp_path):
    path = tmp_path / "z.json"
    path.write_text(json.dumps({"experiment": "jump", "control": {"torque_limit": 0},
                                "output": str(tmp_path / "z")}))
    code, _, err = run(capsys, "sim", "jump", "--config", str(path))
    assert code == 2 and "NoTakeoff" in err


def test_sim_kind_mismatch(capsys, tmp_path):
    path = tmp_path / "r.json"
    path.write_text(json.dumps({"experiment": "scaling"}))
    code, _, err = run(capsys, "sim", "jump", "--config", str(path))
    assert code == 1 and "not 'jump'" in err


def test_sweep_rejects_shared_prefix(capsys, tmp_path):
    paths = []
    for name in ("a", "b"):
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps({"experiment": "jump", "output": str(tmp_path / "same")}))
        paths.append(str(p))
    code, _, err = run(capsys, "sim", "jump", "--sweep", *paths)
    assert code == 1 and "disjoint" in err


def test_sweep_runs_in_parallel(capsys, tmp_path):
    paths = []
    for name, limit in (("ok", None), ("weak", 0)):
        data = {"experiment": "jump", "output": str(tmp_path / name)}
        if limit is not None:
            data["control"] = {"torque_limit": limit}
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(data))
        paths.append(str(p))
    code, _, _ = run(capsys, "sim", "jump", "--sweep", *paths, "--jobs", "2")
    assert code == 2
    assert (tmp_path / "ok.report.json").exists()
    assert not (tmp_path / "weak.report.json").exists()


def test_usage_errors_exit_64():
    proc = subprocess.run([sys.executable, "-m", "doggo_lab", "fly"], capture_output=True, text=True)
    assert proc.returncode == 64
    assert "invalid choice" in proc.stderr
    proc = subprocess.run([sys.executable, "-m", "doggo_lab", "sim", "jump", "--seed", "x"],
                          capture_output=True, text=True)
    assert proc.returncode == 64


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "0.1.0" in capsys.readouterr().out
