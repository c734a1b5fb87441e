"""Viability-map sweeps over (lambda, delay, control frequency, duty cycle)."""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .controller import ControlSchedule
from .leg import DropConfig, run_drop
from .metrics import MAX_SETTLING_TIME, LandingVerdict, settle_metrics
from .model import ComplianceSplit, ConfigurationError

WORKERS_ENV = "HYBRIDLEG_WORKERS"
CSV_HEADER = "lambda,delay_ms,freq_hz,duty,viable,settling_s,final_height_m,failure_reason"


def _steps(start: float, stop: float, step: float) -> tuple[float, ...]:
    n = int(round((stop - start) / step))
    return tuple(round(start + i * step, 10) for i in range(n + 1))


@dataclass(frozen=True)
class SweepGrid:
    lambdas: tuple[float, ...] = _steps(0.0, 1.0, 0.05)
    delays: tuple[float, ...] = _steps(0.0, 0.060, 0.005)
    frequencies: tuple[float, ...] = (20.0, 50.0, 100.0, 250.0, 1000.0)
    duty_cycles: tuple[float, ...] = (0.25, 0.5, 1.0)

    def __post_init__(self):
        for name in ("lambdas", "delays", "frequencies", "duty_cycles"):
            values = tuple(float(v) for v in getattr(self, name))
            if not values:
                raise ConfigurationError(f"{name} must not be empty")
            object.__setattr__(self, name, tuple(sorted(set(values))))
        if min(self.lambdas) < 0 or max(self.lambdas) > 1:
            raise ConfigurationError("lambdas must lie in [0, 1]")
        if min(self.delays) < 0:
            raise ConfigurationError("delays must be non-negative")
        if min(self.frequencies) <= 0:
            raise ConfigurationError("frequencies must be positive")
        if min(self.duty_cycles) <= 0 or max(self.duty_cycles) > 1:
            raise ConfigurationError("duty_cycles must lie in (0, 1]")

    def cells(self):
        """Canonical cell order: duty cycle, frequency, lambda, delay."""
        return [(lam, d, f, dc)
                for dc in self.duty_cycles
                for f in self.frequencies
                for lam in self.lambdas
                for d in self.delays]

    def __len__(self):
        return (len(self.lambdas) * len(self.delays) * len(self.frequencies)
                * len(self.duty_cycles))

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepGrid":
        kw = {}
        if "lambdas" in doc:
            kw["lambdas"] = doc["lambdas"]
        if "delays_ms" in doc:
            kw["delays"] = [round(v / 1000.0, 10) for v in doc["delays_ms"]]
        if "frequencies_hz" in doc:
            kw["frequencies"] = doc["frequencies_hz"]
        if "duty_cycles" in doc:
            kw["duty_cycles"] = doc["duty_cycles"]
        return cls(**kw)


@dataclass(frozen=True)
class CellResult:
    lambda_passive: float
    delay: float
    frequency: float
    duty_cycle: float
    verdict: LandingVerdict

    @property
    def viable(self) -> bool:
        return self.verdict.viable


@dataclass
class ViabilityMap:
    grid: SweepGrid
    cells: list[CellResult]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.cells) != len(self.grid):
            raise ValueError(f"map has {len(self.cells)} cells, grid needs {len(self.grid)}")

    def panel(self, frequency: float, duty_cycle: float) -> list[CellResult]:
        return [c for c in self.cells
                if c.frequency == frequency and c.duty_cycle == duty_cycle]

    def viable_count(self, frequency: float, duty_cycle: float) -> int:
        return sum(c.viable for c in self.panel(frequency, duty_cycle))

    def viable_grid(self, frequency: float, duty_cycle: float) -> np.ndarray:
        """Boolean array indexed [delay, lambda]."""
        out = np.zeros((len(self.grid.delays), len(self.grid.lambdas)), dtype=bool)
        li = {v: i for i, v in enumerate(self.grid.lambdas)}
        di = {v: i for i, v in enumerate(self.grid.delays)}
        for c in self.panel(frequency, duty_cycle):
            out[di[c.delay], li[c.lambda_passive]] = c.viable
        return out

    def cell(self, lambda_passive, delay, frequency, duty_cycle) -> CellResult:
        for c in self.cells:
            if (c.lambda_passive, c.delay, c.frequency, c.duty_cycle) == (
                    lambda_passive, delay, frequency, duty_cycle):
                return c
        raise KeyError((lambda_passive, delay, frequency, duty_cycle))


def cell_config(base: DropConfig, lam: float, delay: float, freq: float, duty: float) -> DropConfig:
    sched = replace(base.schedule, frequency=freq, duty_cycle=duty, delay=delay)
    split = ComplianceSplit(base.split.k_total, lam)
    return replace(base, split=split, schedule=sched)


def run_cell(base: DropConfig, cell) -> CellResult:
    lam, d, f, dc = cell
    verdict = settle_metrics(run_drop(cell_config(base, lam, d, f, dc)))
    return CellResult(lam, d, f, dc, verdict)


def _run_chunk(args):
    base, chunk = args
    return [run_cell(base, c) for c in chunk]


def default_workers() -> int:
    n = os.cpu_count() or 1
    cap = os.environ.get(WORKERS_ENV)
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def run_sweep(grid: SweepGrid, base: DropConfig | None = None,
              workers: int | None = None) -> ViabilityMap:
    """Simulate every grid cell. Results come back in canonical order.

    Cells are independent; with more than one worker they are dealt into
    interleaved chunks (which evens out slow cells) and run in a process pool.
    """
    base = base or DropConfig()
    cells = grid.cells()
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(cells) < 2:
        results = [run_cell(base, c) for c in cells]
    else:
        n_chunks = min(len(cells), workers * 4)
        chunks = [cells[i::n_chunks] for i in range(n_chunks)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [(base, ch) for ch in chunks]))
        # undo the striding
        results = [None] * len(cells)
        for i, part in enumerate(parts):
            results[i::n_chunks] = part
    return ViabilityMap(grid, results)


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def csv_rows(vmap: ViabilityMap) -> list[str]:
    rows = [CSV_HEADER]
    for c in vmap.cells:
        v = c.verdict
        rows.append(",".join([
            _fmt(c.lambda_passive), _fmt(round(c.delay * 1000.0, 9)), _fmt(c.frequency),
            _fmt(c.duty_cycle), "1" if v.viable else "0", _fmt(v.settling_time),
            _fmt(v.final_height), v.failure_reason,
        ]))
    return rows


# grey for failures, a dark-to-light ramp over settling time for viable cells
FAILED_FILL = "#bfbfbf"
_RAMP = np.array([[68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37]],
                 dtype=float)


def _ramp_color(x: float) -> str:
    x = min(max(x, 0.0), 1.0) * (len(_RAMP) - 1)
    i = min(int(x), len(_RAMP) - 2)
    rgb = _RAMP[i] + (x - i) * (_RAMP[i + 1] - _RAMP[i])
    return "#%02x%02x%02x" % tuple(int(round(c)) for c in rgb)


def panel_svg(vmap: ViabilityMap, frequency: float, duty_cycle: float, cell: int = 24) -> str:
    grid = vmap.grid
    nx, ny = len(grid.lambdas), len(grid.delays)
    left, top = 60, 30
    width, height = left + nx * cell + 20, top + ny * cell + 50
    li = {v: i for i, v in enumerate(grid.lambdas)}
    di = {v: i for i, v in enumerate(grid.delays)}
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<text x="{left}" y="18" font-size="13" font-family="sans-serif">'
        f'{frequency:g} Hz, duty cycle {duty_cycle * 100:g} %</text>',
    ]
    for c in vmap.panel(frequency, duty_cycle):
        x = left + li[c.lambda_passive] * cell
        y = top + di[c.delay] * cell
        if c.viable:
            fill = _ramp_color(c.verdict.settling_time / MAX_SETTLING_TIME)
            cls = "viable"
        else:
            fill, cls = FAILED_FILL, "failed"
        out.append(
            f'<rect class="{cls}" x="{x}" y="{y}" width="{cell - 1}" height="{cell - 1}" '
            f'fill="{fill}"><title>lambda={c.lambda_passive:g} delay={c.delay * 1000:g} ms '
            f'settling={c.verdict.settling_time:.3g} s</title></rect>'
        )
    for lam, i in li.items():
        if i % 4 == 0:
            out.append(f'<text x="{left + i * cell + 2}" y="{top + ny * cell + 16}" '
                       f'font-size="10" font-family="sans-serif">{lam:g}</text>')
    for d, j in di.items():
        if j % 2 == 0:
            out.append(f'<text x="8" y="{top + j * cell + cell * 0.7:.1f}" font-size="10" '
                       f'font-family="sans-serif">{d * 1000:g} ms</text>')
    out.append(f'<text x="{left}" y="{top + ny * cell + 36}" font-size="11" '
               f'font-family="sans-serif">passive compliance ratio</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def soft_checks(vmap: ViabilityMap) -> dict:
    """Trend checks that describe the map; none of them abort anything."""
    grid = vmap.grid
    checks = {}
    if 1.0 in grid.lambdas and 0.0 in grid.delays:
        checks["reference_viable_every_panel"] = all(
            vmap.cell(1.0, 0.0, f, dc).viable
            for dc in grid.duty_cycles for f in grid.frequencies)
    counts = {f"{dc:g}": {f"{f:g}": vmap.viable_count(f, dc) for f in grid.frequencies}
              for dc in grid.duty_cycles}
    checks["viable_counts"] = counts
    fmax, fmin = max(grid.frequencies), min(grid.frequencies)
    checks["frequency_endpoints_monotone"] = {
        f"{dc:g}": vmap.viable_count(fmax, dc) >= vmap.viable_count(fmin, dc)
        for dc in grid.duty_cycles}
    checks["frequency_sequence_monotone"] = {
        f"{dc:g}": all(vmap.viable_count(a, dc) <= vmap.viable_count(b, dc)
                       for a, b in zip(grid.frequencies, grid.frequencies[1:]))
        for dc in grid.duty_cycles}
    lam_violations = []
    for dc in grid.duty_cycles:
        g = vmap.viable_grid(fmax, dc)
        for j, d in enumerate(grid.delays):
            row = g[j]
            if row.any():
                first = int(np.argmax(row))
                if not row[first:].all():
                    lam_violations.append({"duty": dc, "delay_ms": round(d * 1000, 9)})
    checks["lambda_monotone_at_max_frequency"] = not lam_violations
    checks["lambda_monotone_violations"] = lam_violations
    return checks


def panel_filename(frequency: float, duty_cycle: float) -> str:
    return f"panel_f{frequency:g}hz_dc{duty_cycle * 100:g}.svg"


def emit_map(vmap: ViabilityMap, out_dir) -> list[Path]:
    """Write viability.csv, one SVG per (frequency, duty) panel and summary.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    csv_path = out / "viability.csv"
    csv_path.write_text("\n".join(csv_rows(vmap)) + "\n")
    paths.append(csv_path)
    for dc in vmap.grid.duty_cycles:
        for f in vmap.grid.frequencies:
            p = out / panel_filename(f, dc)
            p.write_text(panel_svg(vmap, f, dc))
            paths.append(p)
    summary = out / "summary.json"
    doc = {"cells": len(vmap.cells), "soft_checks": soft_checks(vmap), **vmap.meta}
    summary.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    paths.append(summary)
    return paths
