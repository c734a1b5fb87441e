import json
import re

import numpy as np
import pytest

from hybridleg.leg import DropConfig, run_drop
from hybridleg.metrics import settle_metrics
from hybridleg.model import ConfigurationError
from hybridleg.sweep import (
    CSV_HEADER,
    SweepGrid,
    cell_config,
    csv_rows,
    emit_map,
    panel_filename,
    run_sweep,
)

SMALL = SweepGrid(lambdas=(0.0, 0.5, 1.0), delays=(0.0, 0.03), frequencies=(50.0, 1000.0),
                  duty_cycles=(0.5, 1.0))


@pytest.fixture(scope="module")
def small_map():
    return run_sweep(SMALL, workers=1)


def test_default_grid_shape():
    g = SweepGrid()
    assert len(g.lambdas) == 21 and len(g.delays) == 13
    assert len(g.lambdas) * len(g.delays) == 273
    assert len(g) == 4095
    assert g.delays[-1] == 0.06 and g.lambdas[1] == 0.05


def test_grid_validation_and_from_dict():
    with pytest.raises(ConfigurationError):
        SweepGrid(lambdas=(1.5,))
    with pytest.raises(ConfigurationError):
        SweepGrid(delays=())
    g = SweepGrid.from_dict({"delays_ms": [10, 0], "frequencies_hz": [100]})
    assert g.delays == (0.0, 0.01) and g.frequencies == (100.0,)


def test_cells_match_direct_runs(small_map):
    for c in small_map.cells[::5]:
        cfg = cell_config(DropConfig(), c.lambda_passive, c.delay, c.frequency, c.duty_cycle)
        assert settle_metrics(run_drop(cfg)) == c.verdict


def test_serial_equals_parallel(small_map):
    par = run_sweep(SMALL, workers=2)
    assert csv_rows(par) == csv_rows(small_map)


def test_csv_layout(small_map):
    rows = csv_rows(small_map)
    assert rows[0] == CSV_HEADER
    assert len(rows) == len(SMALL) + 1
    first = rows[1].split(",")
    assert first[:4] == ["0", "0", "50", "0.5"]


def test_emit_map(tmp_path, small_map):
    paths = emit_map(small_map, tmp_path)
    names = {p.name for p in paths}
    assert {"viability.csv", "summary.json"} <= names
    assert len([n for n in names if n.endswith(".svg")]) == 4
    for f in SMALL.frequencies:
        for dc in SMALL.duty_cycles:
            svg = (tmp_path / panel_filename(f, dc)).read_text()
            grey = len(re.findall(r'fill="#bfbfbf"', svg))
            failed = sum(not c.viable for c in small_map.panel(f, dc))
            assert grey == failed
            assert svg.count("<rect") == len(SMALL.lambdas) * len(SMALL.delays)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["cells"] == len(SMALL)
    assert summary["soft_checks"]["reference_viable_every_panel"]


def test_full_panel_row_count():
    grid = SweepGrid(frequencies=(1000.0,), duty_cycles=(1.0,))
    vmap = run_sweep(grid)
    assert len(csv_rows(vmap)) == 274
    assert vmap.viable_grid(1000.0, 1.0).shape == (13, 21)
    assert vmap.cell(1.0, 0.0, 1000.0, 1.0).viable
