"""Where the numbers come from: knee stiffness and the expected sensorimotor delay."""

# %% The knee spring is a linear spring wrapped around a pulley.
from hybridleg.model import LegGeometry, biological_delay, hip_height, rotational_from_linear

k_knee = rotational_from_linear(4680.0, 0.0189)
print(f"rotational knee stiffness: {k_knee:.4f} N m/rad")

# %% Delay grows slowly with body mass.
for mass in (0.6, 2.0, 20.0, 200.0):
    print(f"{mass:7.1f} kg -> {biological_delay(mass) * 1000:5.1f} ms")

# %% Leg geometry: hip height against knee angle.
import numpy as np

geom = LegGeometry()
for theta in np.linspace(0.1, 2.0, 6):
    print(f"knee {theta:4.2f} rad -> hip {hip_height(geom, theta):.4f} m")
print(f"rest hip height: {geom.rest_height:.4f} m")
