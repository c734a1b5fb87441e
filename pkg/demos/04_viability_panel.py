"""One viability panel (1 kHz, full duty) written as CSV and SVG.

The full grid is ``hybridleg sweep --out DIR``; one panel takes about 5 s.
"""

# %%
import sys
from pathlib import Path

from hybridleg.sweep import SweepGrid, emit_map, run_sweep

out = Path(sys.argv[1] if len(sys.argv) > 1 else "viability_demo")
grid = SweepGrid(frequencies=(1000.0,), duty_cycles=(1.0,))
vmap = run_sweep(grid)

# %% Rows are delays (0 to 60 ms), columns are passive ratios (0 to 1).
for d, row in zip(grid.delays, vmap.viable_grid(1000.0, 1.0)):
    print(f"{d * 1000:4.0f} ms  " + "".join("#" if v else "." for v in row))

for p in emit_map(vmap, out):
    print("wrote", p)
