"""Command-line entry point.

Exit codes: 0 completed, 1 runtime failure, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .controller import ControlSchedule
from .leg import CONTACT_MODES, SPRING_MODES, DropConfig, run_drop
from .metrics import band_sensitivity, read_trajectory_csv, settle_metrics, trajectory_mse, \
    write_trajectory_csv
from .model import (
    DROP_HEIGHT,
    LEG_MASS,
    REFERENCE_STIFFNESS,
    SEGMENT_LENGTH,
    BodyParams,
    ComplianceSplit,
    ConfigurationError,
    LegGeometry,
    biological_delay,
)
from .pendulum import (
    DEFAULT_COM_DISTANCE,
    REDUCED_DAMPING,
    REDUCED_MASS,
    REDUCED_STIFFNESS,
    PendulumParams,
    classify_step,
    poles,
    step_response,
)
from .quadruped import load_cases, run_table, write_summary
from .sweep import SweepGrid, emit_map, run_sweep

MANIFEST = "manifest.json"


class UsageError(Exception):
    """Invalid flag value; reported with exit code 2."""


def _check(cond: bool, flag: str, msg: str):
    if not cond:
        raise UsageError(f"{flag}: {msg}")


def _check_lambda(values, flag="--lambda"):
    for v in np.atleast_1d(values):
        _check(0.0 <= v <= 1.0, flag, f"passive ratio must lie in [0, 1], got {v:g}")


def _check_delay(values, flag="--delay-ms"):
    for v in np.atleast_1d(values):
        _check(v >= 0.0, flag, f"delay must be non-negative, got {v:g}")


def _write_manifest(out: Path, args, outputs: list[Path]):
    params = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    doc = {
        "command": args.command,
        "argv": args._argv,
        "parameters": params,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "outputs": sorted(p.name for p in outputs),
    }
    doc["parameters"].pop("_argv", None)
    (out / MANIFEST).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _emit_csv(lines: list[str], args, name: str) -> None:
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    _write_manifest(out, args, [path])


# -- subcommands -------------------------------------------------------------

def cmd_delay_law(args) -> int:
    _check(args.mass > 0, "--mass", f"mass must be positive, got {args.mass:g}")
    d = biological_delay(args.mass)
    print(f"{d * 1000:.1f} ms ({d:.6f} s) for {args.mass:g} kg")
    return 0


def _pendulum(args, lam: float, delay_ms: float) -> PendulumParams:
    inertia = args.inertia if args.inertia is not None else args.mass * args.com_distance**2
    return PendulumParams(inertia=inertia, mass=args.mass, com_distance=args.com_distance,
                          damping=args.damping, split=ComplianceSplit(args.k_total, lam),
                          delay=delay_ms / 1000.0)


def _check_pendulum(args):
    _check(args.mass >= 0, "--mass", "must be non-negative")
    _check(args.k_total > 0, "--k-total", "must be positive")
    _check(args.damping >= 0, "--damping", "must be non-negative")
    _check(args.com_distance >= 0, "--com-distance", "must be non-negative")
    if args.inertia is None:
        _check(args.mass * args.com_distance**2 > 0, "--inertia",
               "point-mass inertia is zero; give --inertia")
    else:
        _check(args.inertia > 0, "--inertia", "must be positive")


def cmd_poles(args) -> int:
    _check_lambda(args.lambda_)
    _check_delay(args.delay_ms)
    _check_pendulum(args)
    lines = ["t_d,lambda,re,im"]
    for lam in args.lambda_:
        for d in args.delay_ms:
            for r in poles(_pendulum(args, lam, d)).roots:
                lines.append(f"{d / 1000:.6g},{lam:g},{r.real:.10g},{r.imag:.10g}")
    _emit_csv(lines, args, "poles.csv")
    return 0


def cmd_step(args) -> int:
    _check_lambda(args.lambda_)
    _check_delay(args.delay_ms)
    _check_pendulum(args)
    _check(args.dt > 0, "--dt", "must be positive")
    _check(args.t_end > 0, "--t-end", "must be positive")
    _check(args.delay_ms == 0 or args.dt <= args.delay_ms / 1000.0, "--dt",
           "step size must not exceed the delay")
    resp = step_response(_pendulum(args, args.lambda_, args.delay_ms), args.step,
                         args.t_end, args.dt)
    lines = ["t,theta"] + [f"{t:.6g},{x:.6g}" for t, x in zip(resp.t, resp.theta)]
    _emit_csv(lines, args, "step.csv")
    print(f"classification: {classify_step(resp)}", file=sys.stderr)
    return 0


def _drop_config(args) -> DropConfig:
    _check_lambda(args.lambda_)
    _check_delay(args.delay_ms)
    _check(args.freq > 0, "--freq", f"frequency must be positive, got {args.freq:g}")
    _check(0 < args.duty <= 1, "--duty", f"duty cycle must lie in (0, 1], got {args.duty:g}")
    _check(args.height > 0, "--height", "drop height must be positive")
    _check(args.k_total > 0, "--k-total", "stiffness must be positive")
    _check(args.mass > 0, "--mass", "mass must be positive")
    _check(args.duration >= 2.5, "--duration", "need at least 2.5 s to judge settling")
    _check(args.dt > 0, "--dt", "must be positive")
    _check(0 < args.rest_angle < math.pi, "--rest-angle", "must lie in (0, pi)")
    return DropConfig(
        drop_height=args.height,
        geometry=LegGeometry(segment_length=args.segment_length, rest_knee_angle=args.rest_angle),
        body=BodyParams(mass=args.mass),
        split=ComplianceSplit(args.k_total, args.lambda_),
        schedule=ControlSchedule(args.freq, args.duty, args.delay_ms / 1000.0),
        duration=args.duration, dt=args.dt, spring_mode=args.spring,
        contact_mode=args.contact,
    )


def cmd_drop(args) -> int:
    cfg = _drop_config(args)
    traj = run_drop(cfg)
    verdict = settle_metrics(traj)
    label = "viable" if verdict.viable else f"failed ({verdict.failure_reason})"
    print(f"{label}: settling {verdict.settling_time:.3f} s, "
          f"final height {verdict.final_height:.4f} m")
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = write_trajectory_csv(traj, out / "trajectory.csv")
        v_path = out / "verdict.json"
        doc = {
            "viable": verdict.viable,
            "failure_reason": verdict.failure_reason,
            "settling_s": verdict.settling_time,
            "final_height_m": verdict.final_height,
            "touchdown_s": traj.touchdown_time,
            "band_sensitivity": band_sensitivity(traj) if traj.status == "ok" else {},
        }
        v_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        _write_manifest(out, args, [csv_path, v_path])
    return 0


def cmd_quadruped(args) -> int:
    cases = load_cases(args.cases_file)
    if args.case is not None:
        labels = [c.case for c in cases]
        _check(str(args.case) in labels, "--case", f"unknown case {args.case}; have {labels}")
        cases = [c for c in cases if c.case == str(args.case)]
    out = Path(args.out) if args.out is not None else None
    summary = run_table(cases, out)
    for row in summary["cases"]:
        tag = "" if row["expected"] in (None, row["outcome"]) else f"  (expected {row['expected']})"
        print(f"case {row['case']}: {row['outcome']}{tag}")
    print(f"{summary['matches']}/{summary['judged']} cases match the expected outcome")
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        outputs = [write_summary(summary, out / "summary.json")]
        outputs += [out / d["trajectory_csv"] for d in summary["discrepancies"]]
        _write_manifest(out, args, outputs)
    return 0


def cmd_sweep(args) -> int:
    doc = {}
    if args.grid is not None:
        try:
            doc = json.loads(Path(args.grid).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"--grid: cannot read {args.grid}: {exc}") from exc
    known = {"lambdas", "delays_ms", "frequencies_hz", "duty_cycles", "drop_height",
             "duration", "k_total", "mass"}
    extra = set(doc) - known
    _check(not extra, "--grid", f"unknown keys {sorted(extra)}")
    try:
        grid = SweepGrid.from_dict(doc)
    except ConfigurationError as exc:
        raise UsageError(f"--grid: {exc}") from exc
    base = DropConfig(drop_height=doc.get("drop_height", DROP_HEIGHT),
                      duration=doc.get("duration", 3.0),
                      split=ComplianceSplit(doc.get("k_total", REFERENCE_STIFFNESS), 1.0),
                      body=BodyParams(mass=doc.get("mass", LEG_MASS)))
    vmap = run_sweep(grid, base, args.workers)
    vmap.meta.update({"band_fraction": 0.05, "grid": doc})
    out = Path(args.out)
    paths = emit_map(vmap, out)
    _write_manifest(out, args, paths)
    total = sum(c.viable for c in vmap.cells)
    print(f"{len(vmap.cells)} cells, {total} viable; wrote {len(paths)} files to {out}")
    return 0


def cmd_compare(args) -> int:
    _check(args.norm > 0, "--norm", "must be positive")
    try:
        a = read_trajectory_csv(args.a)
        b = read_trajectory_csv(args.b)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    print(f"{trajectory_mse(a, b, args.norm):.6g}")
    return 0


# -- parser ------------------------------------------------------------------

def _pendulum_flags(p):
    p.add_argument("--mass", type=float, default=REDUCED_MASS, help="pendulum mass [kg]")
    p.add_argument("--k-total", type=float, default=REDUCED_STIFFNESS,
                   help="total joint stiffness [N m/rad]")
    p.add_argument("--damping", type=float, default=REDUCED_DAMPING,
                   help="joint damping [N m s/rad]")
    p.add_argument("--com-distance", type=float, default=DEFAULT_COM_DISTANCE,
                   help="pivot to center of mass [m]")
    p.add_argument("--inertia", type=float, default=None,
                   help="moment of inertia [kg m^2]; default mass * com_distance^2")


def _out_flag(p, required=False, help="output directory (also receives manifest.json)"):
    p.add_argument("--out", default=None, required=required, help=help)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridleg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("delay-law", help="sensorimotor delay predicted from body mass")
    p.add_argument("--mass", type=float, required=True, help="body mass [kg]")
    p.set_defaults(func=cmd_delay_law)

    p = sub.add_parser("poles", help="closed-loop poles of the delayed pendulum (CSV)")
    p.add_argument("--lambda", dest="lambda_", type=float, nargs="+", default=[0.0, 0.7],
                   help="passive compliance ratio(s) [-]")
    p.add_argument("--delay-ms", type=float, nargs="+",
                   default=[0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0], help="delay(s) [ms]")
    _pendulum_flags(p)
    _out_flag(p, help="output directory; CSV goes to stdout when omitted")
    p.set_defaults(func=cmd_poles)

    p = sub.add_parser("step", help="step response of the delayed pendulum (CSV)")
    p.add_argument("--lambda", dest="lambda_", type=float, default=0.7,
                   help="passive compliance ratio [-]")
    p.add_argument("--delay-ms", type=float, default=20.0, help="delay [ms]")
    p.add_argument("--step", type=float, default=1.0, help="step in commanded angle [rad]")
    p.add_argument("--t-end", type=float, default=2.0, help="duration [s]")
    p.add_argument("--dt", type=float, default=1e-3, help="integration step [s]")
    _pendulum_flags(p)
    _out_flag(p, help="output directory; CSV goes to stdout when omitted")
    p.set_defaults(func=cmd_step)

    p = sub.add_parser("drop", help="single-leg drop landing")
    p.add_argument("--lambda", dest="lambda_", type=float, default=1.0,
                   help="passive compliance ratio [-]")
    p.add_argument("--delay-ms", type=float, default=0.0, help="sensorimotor delay [ms]")
    p.add_argument("--freq", type=float, default=1000.0, help="control frequency [Hz]")
    p.add_argument("--duty", type=float, default=1.0, help="duty cycle, fraction in (0, 1]")
    p.add_argument("--height", type=float, default=DROP_HEIGHT, help="release hip height [m]")
    p.add_argument("--k-total", type=float, default=REFERENCE_STIFFNESS,
                   help="total knee stiffness [N m/rad]")
    p.add_argument("--mass", type=float, default=LEG_MASS, help="mass lumped at the hip [kg]")
    p.add_argument("--segment-length", type=float, default=SEGMENT_LENGTH, help="[m]")
    p.add_argument("--rest-angle", type=float, default=LegGeometry().rest_knee_angle,
                   help="spring rest knee angle [rad]")
    p.add_argument("--duration", type=float, default=3.0, help="simulated time [s]")
    p.add_argument("--dt", type=float, default=0.001, help="physics step [s]")
    p.add_argument("--spring", choices=SPRING_MODES, default="one_directional",
                   help="knee spring law")
    p.add_argument("--contact", choices=CONTACT_MODES, default="pinned",
                   help="ground contact model")
    _out_flag(p)
    p.set_defaults(func=cmd_drop)

    p = sub.add_parser("quadruped", help="quadruped drop cases")
    p.add_argument("--case", type=int, default=None, help="case number; all cases if omitted")
    p.add_argument("--cases-file", default=None, help="JSON case table; bundled table if omitted")
    _out_flag(p)
    p.set_defaults(func=cmd_quadruped)

    p = sub.add_parser("sweep", help="viability-map sweep (CSV + SVG panels)")
    p.add_argument("--grid", default=None, help="JSON grid file; default grid if omitted")
    _out_flag(p, required=True)
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes; default CPU count capped by $HYBRIDLEG_WORKERS")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="normalized MSE between two trajectory CSVs")
    p.add_argument("a", help="trajectory CSV with t,z columns")
    p.add_argument("b", help="trajectory CSV with t,z columns")
    p.add_argument("--norm", type=float, default=0.32, help="normalization length [m]")
    p.set_defaults(func=cmd_compare)

    for name, sp in sub.choices.items():
        sp.add_argument("--config", default=None,
                        help="JSON file of flag defaults (keys are flag names)")
    return parser


def _apply_config(parser, argv):
    """Re-parse with defaults taken from the ``--config`` file, if any."""
    args = parser.parse_args(argv)
    if getattr(args, "config", None) is None:
        return args
    try:
        doc = json.loads(Path(args.config).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"--config: cannot read {args.config}: {exc}") from exc
    sp = parser._subparsers._group_actions[0].choices[args.command]
    dests = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, value in doc.items():
        dest = key.replace("-", "_").lstrip("_")
        dest = "lambda_" if dest == "lambda" else dest
        if dest not in dests or dest in ("help", "config"):
            raise UsageError(f"--config: unknown key {key!r} for {args.command}")
        defaults[dest] = value
    sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"hybridleg: error: {exc}", file=sys.stderr)
        return 2
    args._argv = argv
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"hybridleg {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ConfigurationError as exc:
        print(f"hybridleg {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"hybridleg {args.command}: failed: {exc}", file=sys.stderr)
        return 1


def replay(manifest_path, out=None) -> int:
    """Re-run the command recorded in a manifest, optionally into another directory."""
    doc = json.loads(Path(manifest_path).read_text())
    argv = list(doc["argv"])
    if out is not None:
        if "--out" in argv:
            argv[argv.index("--out") + 1] = str(out)
        else:
            argv += ["--out", str(out)]
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
