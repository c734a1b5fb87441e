"""Dropping one leg from 0.425 m and judging the landing."""

# %%
from hybridleg import ComplianceSplit, ControlSchedule, DropConfig, run_drop, settle_metrics
from hybridleg.metrics import band_sensitivity, trajectory_mse

reference = run_drop(DropConfig())
verdict = settle_metrics(reference)
print(f"passive leg: touchdown {reference.touchdown_time:.3f} s, "
      f"settling {verdict.settling_time:.3f} s, final {verdict.final_height:.4f} m")
print("band sensitivity:", band_sensitivity(reference))

# %% Replace the spring with a delayed virtual spring.
for delay_ms in (0, 10, 20, 25, 30):
    cfg = DropConfig(split=ComplianceSplit(1.6717, 0.0),
                     schedule=ControlSchedule(1000, 1.0, delay_ms / 1000))
    traj = run_drop(cfg)
    v = settle_metrics(traj)
    print(f"active only, {delay_ms:2d} ms: {'viable' if v.viable else v.failure_reason:14s} "
          f"mse vs reference {trajectory_mse(traj, reference):.2e}")

# %% Mixing in 70 % physical spring rescues even slow, late control.
cfg = DropConfig(split=ComplianceSplit(1.6717, 0.7), schedule=ControlSchedule(20, 1.0, 0.060))
print("70 % passive, 20 Hz, 60 ms:", settle_metrics(run_drop(cfg)))
