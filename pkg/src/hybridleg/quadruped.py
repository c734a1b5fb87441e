"""Vertical drop of a four-legged body on identical hybrid-compliant legs.

All legs touch down together and share the body height, so the body feels
four times the single-leg force. Pitch and roll are not modeled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .controller import ControlSchedule
from .leg import DropConfig, run_drop
from .metrics import LandingVerdict, settle_metrics, write_trajectory_csv
from .model import BodyParams, ComplianceSplit, ConfigurationError, LegGeometry, Trajectory

QUADRUPED_MASS = 2.0


@dataclass(frozen=True)
class QuadrupedConfig:
    case: str
    split: ComplianceSplit
    schedule: ControlSchedule
    drop_height: float
    body_mass: float = QUADRUPED_MASS
    n_legs: int = 4
    geometry: LegGeometry = field(default_factory=LegGeometry)
    hip_damping: float = 0.01
    knee_damping: float = 0.05
    duration: float = 4.0
    dt: float = 0.001
    expected: str | None = None

    def __post_init__(self):
        if not self.body_mass > 0:
            raise ConfigurationError("body_mass must be positive")
        if self.n_legs < 1:
            raise ConfigurationError("n_legs must be at least 1")
        if self.expected not in (None, "landed", "failed"):
            raise ConfigurationError("expected must be 'landed' or 'failed'")

    @property
    def load_per_leg(self) -> float:
        return self.body_mass / self.n_legs

    def drop_config(self) -> DropConfig:
        body = BodyParams(mass=self.body_mass, hip_damping=self.hip_damping,
                          knee_damping=self.knee_damping)
        return DropConfig(drop_height=self.drop_height, geometry=self.geometry, body=body,
                          split=self.split, schedule=self.schedule, duration=self.duration,
                          dt=self.dt, n_legs=self.n_legs)


def run_quadruped_case(config: QuadrupedConfig) -> tuple[Trajectory, str, LandingVerdict]:
    """Simulate one case; returns (trajectory, 'landed' | 'failed', verdict)."""
    traj = run_drop(config.drop_config())
    verdict = settle_metrics(traj)
    return traj, ("landed" if verdict.viable else "failed"), verdict


def _case_from_row(row: dict, defaults: dict) -> QuadrupedConfig:
    return QuadrupedConfig(
        case=str(row["case"]),
        split=ComplianceSplit(float(row["k_total"]), float(row["lambda_passive"])),
        schedule=ControlSchedule(float(row["frequency"]),
                                 float(row.get("duty_cycle", defaults.get("duty_cycle", 1.0))),
                                 float(row["delay_ms"]) / 1000.0),
        drop_height=float(row["drop_height"]),
        body_mass=float(row.get("body_mass", defaults.get("body_mass", QUADRUPED_MASS))),
        n_legs=int(row.get("n_legs", defaults.get("n_legs", 4))),
        duration=float(row.get("duration", defaults.get("duration", 4.0))),
        expected=row.get("expected"),
    )


def load_cases(path=None) -> list[QuadrupedConfig]:
    """Read the case table; the bundled seven-case table when ``path`` is None."""
    if path is None:
        text = resources.files("hybridleg").joinpath("data/quadruped_cases.json").read_text()
    else:
        text = Path(path).read_text()
    doc = json.loads(text)
    defaults = {k: v for k, v in doc.items() if k != "cases"}
    return [_case_from_row(row, defaults) for row in doc["cases"]]


def run_table(cases: list[QuadrupedConfig], out_dir=None) -> dict:
    """Run every case and summarize agreement with the expected outcomes.

    Mismatching cases keep their full trajectory: written as CSV under
    ``out_dir`` when given, and returned under ``"trajectories"`` regardless.
    """
    rows, trajectories, discrepancies = [], {}, []
    for cfg in cases:
        traj, outcome, verdict = run_quadruped_case(cfg)
        row = {
            "case": cfg.case,
            "k_total": cfg.split.k_total,
            "lambda_passive": cfg.split.lambda_passive,
            "frequency": cfg.schedule.frequency,
            "delay_ms": round(cfg.schedule.delay * 1000.0, 9),
            "drop_height": cfg.drop_height,
            "outcome": outcome,
            "expected": cfg.expected,
            "settling_s": verdict.settling_time,
            "final_height_m": verdict.final_height,
            "failure_reason": verdict.failure_reason,
            "min_height_m": float(traj.z.min()),
        }
        rows.append(row)
        if cfg.expected is not None and cfg.expected != outcome:
            trajectories[cfg.case] = traj
            entry = dict(row)
            if out_dir is not None:
                out = Path(out_dir)
                out.mkdir(parents=True, exist_ok=True)
                path = write_trajectory_csv(traj, out / f"quadruped_case{cfg.case}.csv")
                entry["trajectory_csv"] = path.name
            discrepancies.append(entry)
    judged = [r for r in rows if r["expected"] is not None]
    return {
        "verdicts": [r["outcome"] for r in rows],
        "expected": [r["expected"] for r in rows],
        "matches": sum(r["outcome"] == r["expected"] for r in judged),
        "judged": len(judged),
        "cases": rows,
        "discrepancies": discrepancies,
        "trajectories": trajectories,
    }


def write_summary(summary: dict, path) -> Path:
    path = Path(path)
    doc = {k: v for k, v in summary.items() if k != "trajectories"}
    path.write_text(json.dumps(doc, indent=2, allow_nan=True) + "\n")
    return path
