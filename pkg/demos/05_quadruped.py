"""Seven quadruped drops: four identical legs under one 2 kg body."""

# %%
from hybridleg.quadruped import load_cases, run_table

summary = run_table(load_cases())
for row in summary["cases"]:
    print(f"case {row['case']}: lambda={row['lambda_passive']:.2f} "
          f"{row['frequency']:g} Hz {row['delay_ms']:g} ms from {row['drop_height']} m "
          f"-> {row['outcome']} (expected {row['expected']}, min hip {row['min_height_m']:.3f} m)")
print(f"{summary['matches']}/{summary['judged']} match")
