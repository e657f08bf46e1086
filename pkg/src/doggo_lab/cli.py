"""``doggo-lab`` command line interface.

Human-readable tables go to stdout, diagnostics to stderr, data to files.
Exit codes: 0 success, 1 configuration error, 2 simulation error, 64 usage.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

from . import __version__
from .actuator import actuator_from_dict, available_actuators, load_actuator
from .config import (
    _clean,
    _gait,
    load_config,
    parse_config,
    run_experiment,
)
from .control import bandwidth_crossover, first_order_response, log_sweep
from .errors import (
    ConfigError,
    InsufficientTravel,
    NoCrossover,
    NoJumpDetected,
    SimulationError,
)
from .gait import GaitName, preset, preview_rows
from .kinematics import LegGeometry, check_suite
from .metrics import (
    GRAVITY,
    comparison_table,
    jump_result,
    run_result,
)
from .scaling import scaling_summary
from .trace import Trace

EXIT_OK, EXIT_CONFIG, EXIT_SIM, EXIT_USAGE = 0, 1, 2, 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _print_pairs(pairs: dict, out=None):
    out = out or sys.stdout
    width = max(len(k) for k in pairs)
    for k, v in pairs.items():
        if isinstance(v, float):
            v = f"{v:.6g}"
        print(f"{k.ljust(width)}  {v}", file=out)


# -- sim ------------------------------------------------------------------------

def _load_sim_config(kind: str, path: str | None, output: str | None, seed: int | None):
    if path:
        cfg = load_config(path)
        if cfg.experiment != kind:
            raise ConfigError(f"{path}: experiment is {cfg.experiment!r}, not {kind!r}")
    else:
        cfg = parse_config({"experiment": kind})
    if output is not None:
        cfg = replace(cfg, output=output)
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    return cfg


def _run_one(args) -> int:
    kind, path, output, seed = args
    try:
        cfg = _load_sim_config(kind, path, output, seed)
    except ConfigError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run_experiment(cfg)


def cmd_sim(args) -> int:
    if args.sweep:
        if args.output:
            print("--output cannot be combined with --sweep; set output per config", file=sys.stderr)
            return EXIT_USAGE
        prefixes = []
        for path in args.sweep:
            try:
                prefixes.append(load_config(path).output)
            except ConfigError as exc:
                print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
                return EXIT_CONFIG
        if len(set(prefixes)) != len(prefixes):
            print("ConfigError: sweep configs must use disjoint output prefixes", file=sys.stderr)
            return EXIT_CONFIG
        jobs = [(args.kind, p, None, args.seed) for p in args.sweep]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(_run_one, jobs))
        return max(codes)
    code = _run_one((args.kind, args.config, args.output, args.seed))
    if code == EXIT_OK:
        cfg = _load_sim_config(args.kind, args.config, args.output, args.seed)
        report = json.loads(Path(f"{cfg.output}.report.json").read_text())
        _print_pairs({k: v for k, v in report["metrics"].items()})
        print(f"wrote {cfg.output}.trace.csv and {cfg.output}.report.json")
    return code


# -- gait ----------------------------------------------------------------------

def cmd_gait(args) -> int:
    geom = LegGeometry()
    try:
        if args.config:
            raw = json.loads(Path(args.config).read_text())
            params, _ = _gait(raw, "gait", geom)
            if args.gait:
                params = preset(args.gait, params)
        else:
            params = preset(args.gait or "trot")
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    duration = args.duration if args.duration is not None else params.period
    rows = preview_rows(params, geom, duration, args.dt)
    header = ["t", "leg", "phase", "x", "z", "theta_d", "gamma_d"]
    if args.csv:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{row[0]:.6g}", row[1], *(f"{v:.9g}" for v in row[2:])])
    else:
        print("  ".join(h.rjust(9) for h in header))
        for row in rows:
            print("  ".join([f"{row[0]:9.4f}", f"{row[1]:9d}", *(f"{v:9.4f}" for v in row[2:])]))
    return EXIT_OK


# -- scaling ---------------------------------------------------------------------

def cmd_scaling(args) -> int:
    try:
        if args.fixture:
            data = json.loads(Path(args.fixture).read_text())
            if args.actuator and isinstance(data, dict) and args.actuator in data:
                data = data[args.actuator]
            act = actuator_from_dict(data)
        else:
            act = load_actuator(args.actuator or "doggo")
        if args.ratio is not None:
            act = replace(act, ratio=args.ratio)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary = scaling_summary(act, args.count, args.robot_mass)
    if args.json:
        print(json.dumps(_clean(summary), indent=2, sort_keys=True))
        return EXIT_OK
    verdict = "PASS" if summary["budget_passes"] else "FAIL"
    _print_pairs({
        "reduction ratio": summary["ratio"],
        "DD radius factor": summary["radius_factor"],
        "DD mass factor": f"{summary['mass_factor']:.3f} ({summary['dd_heavier_pct']:.0f}% heavier)",
        "DD torque factor": summary["torque_factor"],
        "DD inertia factor": summary["inertia_factor"],
        "motor mass (kg)": summary["motor_mass"],
        "transmission budget (kg)": f"{summary['mass_budget']:.4f} = (sqrt({summary['ratio']:g}) - 1) * m",
        "transmission mass (kg)": summary["transmission_mass"],
        "budget verdict": verdict,
        f"saving over {summary['actuator_count']} actuators (kg)": summary["fleet_mass_saving"],
        **({"saving (% of robot)": summary["fleet_saving_pct_of_robot"]}
           if "fleet_saving_pct_of_robot" in summary else {}),
        "QDD reflected inertia": summary["qdd_reflected_inertia"],
        "DD-equivalent inertia": summary["dd_equivalent_inertia"],
    })
    return EXIT_OK


# -- bandwidth -------------------------------------------------------------------

def _read_response_csv(path: str):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"freq_hz", "gain"} - set(reader.fieldnames or [])
        if missing:
            raise ConfigError(f"{path}: missing columns {sorted(missing)}")
        return [(float(r["freq_hz"]), float(r["gain"]), float(r.get("phase_rad") or 0.0))
                for r in reader]


def cmd_bandwidth(args) -> int:
    try:
        if args.input:
            response = _read_response_csv(args.input)
            source = {"input": args.input}
        else:
            response = first_order_response(args.pole, log_sweep(args.f_min, args.f_max, args.points))
            source = {"pole_hz": args.pole, "points": args.points,
                      "f_min": args.f_min, "f_max": args.f_max}
    except (ConfigError, OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = {"crossover_hz": bandwidth_crossover(response), "lower_bound": False}
    except NoCrossover as exc:
        result = {"crossover_hz": exc.lower_bound, "lower_bound": True}
    except ValueError as exc:
        print(f"ValueError: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result.update(source)
    if args.json:
        print(json.dumps(result, sort_keys=True))
    else:
        prefix = ">= " if result["lower_bound"] else ""
        print(f"crossover frequency: {prefix}{result['crossover_hz']:.2f} Hz")
        print(json.dumps(result, sort_keys=True))
    return EXIT_OK


# -- metrics / compare -----------------------------------------------------------

def trace_metrics(trace: Trace, mass: float, gravity: float = GRAVITY) -> dict:
    out: dict = {}
    try:
        out["jump"] = asdict(jump_result(trace))
    except NoJumpDetected as exc:
        out["jump"] = {"error": str(exc)}
    try:
        run = run_result(trace, mass, gravity)
        out["run"] = asdict(run)
    except (InsufficientTravel, ValueError) as exc:
        out["run"] = {"error": str(exc)}
    return _clean(out)


def cmd_metrics(args) -> int:
    try:
        trace = Trace.from_csv(args.trace)
    except (OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = trace_metrics(trace, args.mass, args.gravity)
    if args.json:
        print(json.dumps(result, indent=2, sort_keys=True))
    else:
        for section, values in result.items():
            print(f"[{section}]")
            _print_pairs(values)
    return EXIT_OK


def cmd_compare(args) -> int:
    computed = None
    if args.report:
        try:
            report = json.loads(Path(args.report).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        m = report.get("metrics", {})
        computed = {}
        if report.get("experiment") == "run":
            computed.update(v_ss=m.get("v_ss"), cot=m.get("cost_of_transport"))
        elif report.get("experiment") == "jump":
            computed.update(jump_h=m.get("h"), agility=m.get("agility"))
    tables = ["I", "II", "III"] if args.table == "all" else [args.table]
    titles = {"I": "Table I: actuators", "II": "Table II: physical properties",
              "III": "Table III: performance"}
    for i, table in enumerate(tables):
        if i:
            print()
        print(titles[table])
        print(comparison_table(computed=computed if table != "I" else None, table=table))
    return EXIT_OK


def cmd_kin(args) -> int:
    geom = LegGeometry(args.l1, args.l2)
    res = check_suite(geom, args.samples, args.seed)
    checks = {
        "roundtrip < 1e-9 m": res["roundtrip_max_error"] < 1e-9,
        "jacobian vs finite differences < 1e-6": res["jacobian_max_rel_error"] < 1e-6,
        "|det J| < 1e-12 at gamma in {0, pi}": max(res["det_at_singularities"]) < 1e-12,
    }
    print(f"r_min = {res['r_min']:.3f} m")
    print(f"r_max = {res['r_max']:.3f} m")
    print(f"FK/IK roundtrip max error: {res['roundtrip_max_error']:.3e} m over {args.samples} states")
    print(f"Jacobian max relative error: {res['jacobian_max_rel_error']:.3e}")
    print(f"|det J| at gamma = 0, pi: {res['det_at_singularities'][0]:.1e}, {res['det_at_singularities'][1]:.1e}")
    for name, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return EXIT_OK if all(checks.values()) else EXIT_CONFIG


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="doggo-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("sim", help="run a simulated jump or run experiment")
    sim.add_argument("kind", choices=["jump", "run"])
    sim.add_argument("--config", help="experiment config JSON (defaults used when omitted)")
    sim.add_argument("--output", help="output path prefix (overrides the config)")
    sim.add_argument("--seed", type=int, help="seed for optional noise features")
    sim.add_argument("--sweep", nargs="+", metavar="CONFIG", help="run several configs in parallel")
    sim.add_argument("--jobs", type=int, default=None, help="parallel workers for --sweep")
    sim.set_defaults(func=cmd_sim)

    gait = sub.add_parser("gait", help="gait trajectory tools")
    gsub = gait.add_subparsers(dest="gait_command", required=True, parser_class=_Parser)
    prev = gsub.add_parser("preview", help="print foot targets and virtual-leg commands")
    prev.add_argument("--gait", choices=[g.value for g in GaitName])
    prev.add_argument("--config", help="gait parameter JSON")
    prev.add_argument("--duration", type=float, help="seconds to preview (default one period)")
    prev.add_argument("--dt", type=float, default=0.01)
    prev.add_argument("--csv", action="store_true", help="emit CSV rows")
    prev.set_defaults(func=cmd_gait)

    sc = sub.add_parser("scaling", help="actuator scaling laws and QDD mass budget")
    sc.add_argument("--actuator", help=f"fixture name ({', '.join(available_actuators())})")
    sc.add_argument("--fixture", help="actuator fixture JSON file")
    sc.add_argument("--ratio", type=float, help="override the reduction ratio")
    sc.add_argument("--count", type=int, default=8, help="actuators per robot")
    sc.add_argument("--robot-mass", type=float, default=4.8)
    sc.add_argument("--json", action="store_true")
    sc.set_defaults(func=cmd_scaling)

    bw = sub.add_parser("bandwidth", help="-3 dB crossover of a frequency response")
    src = bw.add_mutually_exclusive_group(required=True)
    src.add_argument("--pole", type=float, help="synthetic first-order plant pole (Hz)")
    src.add_argument("--input", help="CSV with freq_hz, gain, phase_rad columns")
    bw.add_argument("--points", type=int, default=30)
    bw.add_argument("--f-min", type=float, default=5.0)
    bw.add_argument("--f-max", type=float, default=400.0)
    bw.add_argument("--json", action="store_true")
    bw.set_defaults(func=cmd_bandwidth)

    me = sub.add_parser("metrics", help="compute metrics from a trace CSV")
    me.add_argument("--trace", required=True)
    me.add_argument("--mass", type=float, default=4.8)
    me.add_argument("--gravity", type=float, default=GRAVITY)
    me.add_argument("--json", action="store_true")
    me.set_defaults(func=cmd_metrics)

    cmp_ = sub.add_parser("compare", help="render the comparison tables")
    cmp_.add_argument("--table", choices=["I", "II", "III", "all"], default="all")
    cmp_.add_argument("--report", help="report.json whose metrics are appended as a row")
    cmp_.set_defaults(func=cmd_compare)

    kin = sub.add_parser("kin", help="leg kinematics tools")
    ksub = kin.add_subparsers(dest="kin_command", required=True, parser_class=_Parser)
    chk = ksub.add_parser("check", help="run the kinematics property suite")
    chk.add_argument("--samples", type=int, default=100_000)
    chk.add_argument("--seed", type=int, default=0)
    chk.add_argument("--l1", type=float, default=0.085)
    chk.add_argument("--l2", type=float, default=0.165)
    chk.set_defaults(func=cmd_kin)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SimulationError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SIM
    except ConfigError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
