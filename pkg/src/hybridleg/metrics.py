"""Landing metrics: settling time, final hip height, viability, trajectory MSE."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import Trajectory

MAX_SETTLING_TIME = 0.7
MIN_FINAL_HEIGHT = 0.3
FINAL_WINDOW = 0.5
MIN_POST_TOUCHDOWN = 2.0
DEFAULT_BAND = 0.05
MSE_GRID_DT = 0.001
MSE_NORMALIZATION = 0.32

# boundary-inclusive comparisons tolerate accumulated rounding
_THRESHOLD_SLACK = 1e-9
# smallest settling band, keeps a perfectly flat trajectory settled at t=0
_BAND_FLOOR = 1e-9

FAILURE_REASONS = ("none", "slow_settling", "collapsed", "diverged", "inverted")


@dataclass(frozen=True)
class LandingVerdict:
    settling_time: float
    final_height: float
    viable: bool
    failure_reason: str = "none"
    band: float = 0.0


def final_height(traj: Trajectory, window: float = FINAL_WINDOW) -> float:
    sel = traj.t >= traj.t[-1] - window - 1e-12
    return float(np.mean(traj.z[sel]))


def settling_time(traj: Trajectory, band_fraction: float = DEFAULT_BAND,
                  final: float | None = None) -> tuple[float, float]:
    """Return ``(settling_time, band)`` measured from touch-down.

    The band is ``band_fraction`` times the excursion from the drop height to
    the final height. Settling time is the last sample time at which the hip
    leaves that band, or zero if it never does after touch-down.
    """
    if final is None:
        final = final_height(traj)
    td = traj.touchdown_time
    band = max(band_fraction * abs(traj.drop_height - final), _BAND_FLOOR)
    sel = traj.t >= td
    t, z = traj.t[sel], traj.z[sel]
    outside = np.nonzero(np.abs(z - final) > band)[0]
    if outside.size == 0:
        return 0.0, band
    return float(t[outside[-1]] - td), band


def settle_metrics(traj: Trajectory, band_fraction: float = DEFAULT_BAND) -> LandingVerdict:
    if traj.status in ("diverged", "inverted"):
        return LandingVerdict(float("inf"), float(traj.z[-1]) if len(traj) else float("nan"),
                              False, traj.status)
    if traj.touchdown_time is None:
        raise ValueError("trajectory has no touch-down")
    if traj.t[-1] - traj.touchdown_time < MIN_POST_TOUCHDOWN - 1e-9:
        raise ValueError(
            f"trajectory must span {MIN_POST_TOUCHDOWN} s after touch-down, "
            f"got {traj.t[-1] - traj.touchdown_time:.3f} s"
        )
    final = final_height(traj)
    ts, band = settling_time(traj, band_fraction, final)
    reason = "none"
    if final < MIN_FINAL_HEIGHT - _THRESHOLD_SLACK:
        reason = "collapsed"
    elif ts > MAX_SETTLING_TIME + _THRESHOLD_SLACK:
        reason = "slow_settling"
    return LandingVerdict(ts, final, reason == "none", reason, band)


def band_sensitivity(traj: Trajectory, fractions=(0.02, 0.05, 0.10)) -> dict:
    """Settling time for several band fractions, keyed by the fraction."""
    final = final_height(traj)
    return {f"{f:g}": settling_time(traj, f, final)[0] for f in fractions}


def trajectory_mse(a: Trajectory, b: Trajectory, normalization: float = MSE_NORMALIZATION,
                   dt: float = MSE_GRID_DT) -> float:
    """Mean squared hip-height difference over the common time span, per normalization**2.

    Both trajectories are linearly resampled onto a shared grid of spacing ``dt``.
    """
    lo = max(a.t[0], b.t[0])
    hi = min(a.t[-1], b.t[-1])
    if not hi > lo:
        raise ValueError("trajectories do not overlap in time")
    n = int(np.floor((hi - lo) / dt + 1e-9)) + 1
    grid = lo + dt * np.arange(n)
    za = np.interp(grid, a.t, a.z)
    zb = np.interp(grid, b.t, b.z)
    return float(np.mean((za - zb) ** 2) / normalization**2)


def write_trajectory_csv(traj: Trajectory, path) -> Path:
    path = Path(path)
    cols = np.column_stack([getattr(traj, c) for c in Trajectory.CHANNELS])
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(Trajectory.CHANNELS)
        for row in cols:
            writer.writerow([f"{v + 0.0:.6g}" for v in row[:-1]] + [str(int(row[-1]))])
    return path


def read_trajectory_csv(path) -> Trajectory:
    """Read a trajectory CSV. Only ``t`` and ``z`` columns are required."""
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"t", "z"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: CSV needs at least 't' and 'z' columns")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no samples")
    data = {}
    for name in Trajectory.CHANNELS:
        if name in rows[0]:
            data[name] = np.array([float(r[name]) for r in rows])
    return Trajectory(**data)
