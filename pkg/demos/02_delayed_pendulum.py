"""A pendulum held by a spring that is partly physical, partly software.

The physical part reacts instantly; the software part sees a delayed angle.
"""

# %%
import numpy as np

from hybridleg.pendulum import (
    classify_step,
    critical_delay,
    dominant_real_parts,
    reduced_params,
    pade_step_response,
    step_response,
)

delays = np.arange(0, 31, 5) / 1000.0
for lam in (0.0, 0.7):
    re = dominant_real_parts(delays, lam)
    print(f"lambda={lam}: dominant real part", np.round(re, 3))

# %% Where does each split lose stability?
for lam in (0.0, 0.3, 0.7):
    print(f"lambda={lam}: critical delay {critical_delay(lam)}")

# %% Step responses: the delay integrated directly against its rational approximation.
for lam in (0.0, 0.7):
    p = reduced_params(lam, 0.020)
    dde, pade = step_response(p), pade_step_response(p)
    rms = np.sqrt(np.mean((dde.theta - pade.theta) ** 2))
    print(f"lambda={lam}: {classify_step(dde)}, DDE vs Pade RMS {rms:.1e}")
