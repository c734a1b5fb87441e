"""Shared domain types: compliance split, leg geometry, body parameters.

Angles are in radians, lengths in meters. The knee angle is zero for a fully
extended leg and grows with flexion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

GRAVITY = 9.81

# single-leg reference numbers
SEGMENT_LENGTH = 0.16
PULLEY_RADIUS = 0.0189
LINEAR_SPRING = 4680.0
LEG_MASS = 0.6
HIP_DAMPING = 0.01
KNEE_DAMPING = 0.05
DROP_HEIGHT = 0.425


class ConfigurationError(ValueError):
    """Raised when parameters violate a model precondition."""


def biological_delay(mass_kg: float) -> float:
    """Sensorimotor delay in seconds predicted for an animal of ``mass_kg``."""
    if not mass_kg > 0:
        raise ValueError(f"mass must be positive, got {mass_kg!r}")
    return 0.031 * mass_kg**0.21


def rotational_from_linear(k_linear: float, pulley_radius: float) -> float:
    """Rotational stiffness (N m/rad) of a linear spring acting on a pulley."""
    if not k_linear > 0:
        raise ValueError(f"linear stiffness must be positive, got {k_linear!r}")
    if not pulley_radius > 0:
        raise ValueError(f"pulley radius must be positive, got {pulley_radius!r}")
    return k_linear * pulley_radius**2


REFERENCE_STIFFNESS = rotational_from_linear(LINEAR_SPRING, PULLEY_RADIUS)


@dataclass(frozen=True)
class ComplianceSplit:
    """Total joint stiffness and the fraction carried by the physical spring."""

    k_total: float = REFERENCE_STIFFNESS
    lambda_passive: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.k_total) and self.k_total > 0):
            raise ConfigurationError(f"k_total must be positive, got {self.k_total!r}")
        if not 0.0 <= self.lambda_passive <= 1.0:
            raise ConfigurationError(
                f"lambda_passive must lie in [0, 1], got {self.lambda_passive!r}"
            )

    def k_passive(self) -> float:
        return self.lambda_passive * self.k_total

    def k_active(self) -> float:
        # written as a difference so that k_passive + k_active reproduces k_total
        return self.k_total - self.k_passive()


def split_stiffness(split: ComplianceSplit) -> tuple[float, float]:
    """Return ``(k_passive, k_active)``."""
    return split.k_passive(), split.k_active()


def rest_angle_for_height(height: float, segment_length: float = SEGMENT_LENGTH) -> float:
    """Knee angle at which the unloaded leg stands ``height`` tall."""
    ratio = height / (2.0 * segment_length)
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"height {height!r} not reachable with segments of {segment_length!r}")
    return 2.0 * math.acos(ratio)


@dataclass(frozen=True)
class LegGeometry:
    """Two equal segments, hip angle slaved to half the knee angle.

    With the half-angle constraint the foot stays vertically below the hip and
    the hip height is ``2 L cos(theta / 2)``.
    """

    segment_length: float = SEGMENT_LENGTH
    knee_pulley_radius: float = PULLEY_RADIUS
    rest_knee_angle: float = 0.434
    hip_constraint_gain: float = 0.5

    def __post_init__(self):
        if not self.segment_length > 0:
            raise ConfigurationError("segment_length must be positive")
        if not self.knee_pulley_radius > 0:
            raise ConfigurationError("knee_pulley_radius must be positive")
        if self.hip_constraint_gain != 0.5:
            raise ConfigurationError("hip_constraint_gain is fixed at 1/2")
        if not 0.0 < self.rest_knee_angle < math.pi:
            raise ConfigurationError("rest_knee_angle must lie in (0, pi)")

    @property
    def leg_length(self) -> float:
        return 2.0 * self.segment_length

    @property
    def rest_height(self) -> float:
        return hip_height(self, self.rest_knee_angle)


def hip_height(geom: LegGeometry, theta_knee):
    """Hip height above the foot for a given knee angle (scalar or array)."""
    theta = np.asarray(theta_knee, dtype=float)
    if np.any(theta <= 0.0) or np.any(theta >= math.pi):
        raise ValueError("knee angle must lie in (0, pi)")
    h = 2.0 * geom.segment_length * np.cos(0.5 * theta)
    return float(h) if h.ndim == 0 else h


def hip_height_slope(geom: LegGeometry, theta_knee: float) -> float:
    """dh/dtheta; negative on (0, pi)."""
    return -geom.segment_length * math.sin(0.5 * theta_knee)


def knee_angle_for_height(geom: LegGeometry, z: float) -> float:
    """Inverse of :func:`hip_height`."""
    ratio = z / geom.leg_length
    if not -1.0 < ratio < 1.0:
        raise ValueError(f"hip height {z!r} outside the reachable range")
    return 2.0 * math.acos(ratio)


@dataclass(frozen=True)
class BodyParams:
    mass: float = LEG_MASS
    hip_damping: float = HIP_DAMPING
    knee_damping: float = KNEE_DAMPING
    gravity: float = GRAVITY

    def __post_init__(self):
        if not self.mass > 0:
            raise ConfigurationError("mass must be positive")
        if self.hip_damping < 0 or self.knee_damping < 0:
            raise ConfigurationError("damping coefficients must be non-negative")

    @property
    def knee_coordinate_damping(self) -> float:
        # hip turns at half the knee rate, so its damping enters the knee
        # coordinate scaled by (1/2)^2
        return self.knee_damping + 0.25 * self.hip_damping


@dataclass
class Trajectory:
    """Sampled landing (or any hip-height) trajectory.

    Only ``t`` and ``z`` are required; the remaining channels default to NaN.
    ``touchdown_time`` defaults to the first sample and ``drop_height`` to the
    first height, which is what synthetic trajectories want.
    """

    t: np.ndarray
    z: np.ndarray
    zdot: np.ndarray | None = None
    theta: np.ndarray | None = None
    thetadot: np.ndarray | None = None
    tau_motor: np.ndarray | None = None
    tau_spring: np.ndarray | None = None
    contact: np.ndarray | None = None
    touchdown_time: float | None = None
    drop_height: float | None = None
    status: str = "ok"
    meta: dict = field(default_factory=dict)

    CHANNELS = ("t", "z", "zdot", "theta", "thetadot", "tau_motor", "tau_spring", "contact")

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.z = np.asarray(self.z, dtype=float)
        if self.t.shape != self.z.shape or self.t.ndim != 1:
            raise ValueError("t and z must be 1-D arrays of equal length")
        n = len(self.t)
        for name in self.CHANNELS[2:]:
            value = getattr(self, name)
            if value is None:
                value = np.zeros(n) if name == "contact" else np.full(n, np.nan)
            setattr(self, name, np.asarray(value, dtype=float))
        if self.touchdown_time is None and n:
            self.touchdown_time = float(self.t[0])
        if self.drop_height is None and n:
            self.drop_height = float(self.z[0])

    def __len__(self):
        return len(self.t)

    @property
    def failed(self) -> bool:
        return self.status != "ok"
