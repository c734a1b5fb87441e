"""Planar drop-landing simulation of the two-segment compliant leg.

The body mass is lumped at the hip, the hip slides on a vertical rail and the
segments are massless. With the hip angle slaved to half the knee angle the
foot stays under the hip, so in stance the whole leg has a single degree of
freedom. Stance is integrated in hip-height coordinates with semi-implicit
Euler; the knee torque maps to a vertical leg force through dh/dtheta.

Flight is ballistic (integrated exactly) while a critically damped servo
returns the knee towards its rest angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .controller import ControlSchedule, DelayedController
from .model import (
    DROP_HEIGHT,
    BodyParams,
    ComplianceSplit,
    ConfigurationError,
    LegGeometry,
    Trajectory,
    hip_height,
)

SPRING_MODES = ("one_directional", "linear")
CONTACT_MODES = ("pinned", "penalty")


@dataclass(frozen=True)
class ContactModel:
    """Unilateral spring-damper ground used by the ``penalty`` contact mode."""

    stiffness: float = 5.0e4
    damping: float = 50.0

    def force(self, foot_height: float, foot_velocity: float) -> float:
        if foot_height >= 0.0:
            return 0.0
        return max(0.0, -self.stiffness * foot_height - self.damping * foot_velocity)


@dataclass
class LegState:
    z: float
    zdot: float
    theta: float
    thetadot: float
    contact: bool = False
    t: float = 0.0
    status: str = "ok"


@dataclass(frozen=True)
class DropConfig:
    drop_height: float = DROP_HEIGHT
    geometry: LegGeometry = field(default_factory=LegGeometry)
    body: BodyParams = field(default_factory=BodyParams)
    split: ComplianceSplit = field(default_factory=ComplianceSplit)
    schedule: ControlSchedule = field(default_factory=ControlSchedule)
    duration: float = 3.0
    dt: float = 0.001
    spring_mode: str = "one_directional"
    contact_mode: str = "pinned"
    contact: ContactModel = field(default_factory=ContactModel)
    servo_bandwidth_hz: float = 2.0
    n_legs: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError("physics dt must be positive")
        if not self.duration > 0:
            raise ConfigurationError("duration must be positive")
        if not self.drop_height > 0:
            raise ConfigurationError("drop height must be positive")
        if self.spring_mode not in SPRING_MODES:
            raise ConfigurationError(f"spring_mode must be one of {SPRING_MODES}")
        if self.contact_mode not in CONTACT_MODES:
            raise ConfigurationError(f"contact_mode must be one of {CONTACT_MODES}")
        if self.n_legs < 1:
            raise ConfigurationError("n_legs must be at least 1")

    def with_(self, **changes) -> "DropConfig":
        return replace(self, **changes)


def spring_torque(split: ComplianceSplit, theta: float, theta_d: float,
                  one_directional: bool = True) -> float:
    """Physical knee spring torque. It only resists flexion when one-directional."""
    dtheta = theta - theta_d
    if one_directional and dtheta <= 0.0:
        return 0.0
    return -split.k_passive() * dtheta


def initial_state(config: DropConfig) -> LegState:
    theta_d = config.geometry.rest_knee_angle
    return LegState(z=config.drop_height, zdot=0.0, theta=theta_d, thetadot=0.0)


class _Kernel:
    """Pre-resolved constants for the inner loop."""

    __slots__ = ("L", "two_L", "theta_d", "k_p", "one_dir", "b", "m", "g", "dt",
                 "wn", "penalty", "kc", "bc", "n")

    def __init__(self, config: DropConfig):
        self.L = config.geometry.segment_length
        self.two_L = 2.0 * self.L
        self.theta_d = config.geometry.rest_knee_angle
        self.k_p = config.split.k_passive()
        self.one_dir = config.spring_mode == "one_directional"
        self.b = config.body.knee_coordinate_damping
        self.m = config.body.mass
        self.g = config.body.gravity
        self.dt = config.dt
        self.wn = 2.0 * math.pi * config.servo_bandwidth_hz
        self.penalty = config.contact_mode == "penalty"
        self.kc = config.contact.stiffness
        self.bc = config.contact.damping
        # identical legs share the body height, so their forces add up
        self.n = float(config.n_legs)

    def spring(self, theta):
        d = theta - self.theta_d
        if self.one_dir and d <= 0.0:
            return 0.0
        return -self.k_p * d

    def advance(self, z, zd, th, thd, contact, tau_m):
        """One physics step. Returns (z, zd, th, thd, contact, status)."""
        if self.penalty:
            return self._advance_penalty(z, zd, th, thd, contact, tau_m)
        dt, g, L = self.dt, self.g, self.L
        if contact:
            slope = -L * math.sin(0.5 * th)
            tau = self.spring(th) + tau_m - self.b * thd
            force = tau / slope if slope != 0.0 else -1.0
            if force >= 0.0:
                zd += dt * (self.n * force / self.m - g)
                z += dt * zd
                ratio = z / self.two_L
                if ratio >= 1.0:
                    # leg straightened out: unload and continue in flight
                    z = self.two_L
                    contact = False
                    zd = max(zd, 0.0)
                    return z, zd, 1e-9, 0.0, contact, "ok"
                if ratio <= 0.0:
                    return z, zd, math.pi, thd, contact, "inverted"
                th = 2.0 * math.acos(ratio)
                thd = zd / (-L * math.sin(0.5 * th))
                return z, zd, th, thd, contact, "ok"
            # the massless leg carries no momentum into flight
            contact = False
            thd = 0.0
        # flight: constant gravity integrates exactly
        z += dt * zd - 0.5 * g * dt * dt
        zd -= g * dt
        wn = self.wn
        thd += dt * (wn * wn * (self.theta_d - th) - 2.0 * wn * thd)
        th += dt * thd
        if zd < 0.0 and z <= self.two_L * math.cos(0.5 * th):
            contact = True
            ratio = z / self.two_L
            if ratio <= 0.0:
                return z, zd, math.pi, thd, contact, "inverted"
            th = 2.0 * math.acos(min(ratio, 1.0 - 1e-12))
            thd = zd / (-L * math.sin(0.5 * th))
        return z, zd, th, thd, contact, "ok"

    def _advance_penalty(self, z, zd, th, thd, contact, tau_m):
        # Massless foot between the leg and a spring-damper ground. Force
        # balance at the foot gives the knee rate explicitly; the hip then
        # feels the ground force.
        dt, g, L = self.dt, self.g, self.L
        slope = -L * math.sin(0.5 * th)
        foot = z - self.two_L * math.cos(0.5 * th)
        if foot < 0.0:
            pen = -foot
            tau0 = self.spring(th) + tau_m
            # (tau0 - b thd)/slope = kc pen - bc (zd - slope thd)
            denom = -self.b / slope - self.bc * slope
            thd_c = (self.kc * pen - self.bc * zd - tau0 / slope) / denom
            f = self.kc * pen - self.bc * (zd - slope * thd_c)
            if f > 0.0:
                thd = thd_c
                th += dt * thd
                zd += dt * (self.n * f / self.m - g)
                z += dt * zd
                if not 0.0 < th < math.pi:
                    return z, zd, th, thd, True, "inverted"
                return z, zd, th, thd, True, "ok"
        z += dt * zd - 0.5 * g * dt * dt
        zd -= g * dt
        wn = self.wn
        thd += dt * (wn * wn * (self.theta_d - th) - 2.0 * wn * thd)
        th += dt * thd
        return z, zd, th, thd, False, "ok"


def step_dynamics(state: LegState, config: DropConfig, controller: DelayedController) -> LegState:
    """Advance ``state`` by one physics step under ``controller``.

    The controller records the current knee angle before it is asked for a
    torque, so a zero-delay controller sees the present state.
    """
    if state.status != "ok":
        return replace(state, t=(round(state.t / config.dt) + 1) * config.dt)
    kernel = _Kernel(config)
    # snap to the step grid so repeated stepping matches run_drop exactly
    k = round(state.t / config.dt)
    t = k * config.dt
    controller.record(t, state.theta)
    tau_m = controller.torque(t)
    z, zd, th, thd, contact, status = kernel.advance(
        state.z, state.zdot, state.theta, state.thetadot, state.contact, tau_m)
    if status == "ok" and not all(map(math.isfinite, (z, zd, th, thd))):
        status = "diverged"
    return LegState(z, zd, th, thd, contact, (k + 1) * config.dt, status)


def run_drop(config: DropConfig) -> Trajectory:
    """Release the leg at rest from ``drop_height`` and simulate to ``duration``.

    Samples are taken at the start of every physics step. A failed run
    (inverted or diverged) holds its last valid state for the remaining
    samples and reports the failure in ``Trajectory.status``.
    """
    kernel = _Kernel(config)
    controller = DelayedController(config.schedule, config.split,
                                   config.geometry.rest_knee_angle, config.dt)
    n = int(round(config.duration / config.dt)) + 1
    dt = config.dt
    out = np.empty((n, 8))
    z, zd, th, thd = config.drop_height, 0.0, config.geometry.rest_knee_angle, 0.0
    contact = False
    status = "ok"
    touchdown = None
    touchdown_speed = None
    advance = kernel.advance
    spring = kernel.spring
    record = controller.record
    torque = controller.torque
    i = 0
    for i in range(n):
        t = i * dt
        record(t, th)
        tau_m = torque(t)
        tau_s = spring(th)
        out[i] = (t, z, zd, th, thd, tau_m, tau_s, contact)
        if i == n - 1:
            break
        was_contact = contact
        z, zd, th, thd, contact, status = advance(z, zd, th, thd, contact, tau_m)
        if contact and not was_contact and touchdown is None:
            touchdown = (i + 1) * dt
            touchdown_speed = -zd
        if status == "ok" and not (math.isfinite(z) and math.isfinite(zd)
                                   and math.isfinite(th) and math.isfinite(thd)):
            status = "diverged"
        if status != "ok":
            out[i + 1:] = out[i]
            out[i + 1:, 0] = np.arange(i + 1, n) * dt
            out[i + 1:, 5:7] = 0.0
            break
    traj = Trajectory(*out.T, touchdown_time=touchdown, drop_height=config.drop_height,
                      status=status)
    if touchdown is None:
        traj.touchdown_time = None
    traj.meta["touchdown_speed"] = touchdown_speed
    return traj


def stance_energy(traj: Trajectory, config: DropConfig) -> np.ndarray:
    """Hip kinetic + gravitational energy, plus spring energy while in stance.

    In flight the massless leg is repositioned by its servo, so the spring
    term is only counted during contact.
    """
    m, g = config.body.mass, config.body.gravity
    k_p = config.split.k_passive()
    d = traj.theta - config.geometry.rest_knee_angle
    if config.spring_mode == "one_directional":
        d = np.maximum(d, 0.0)
    spring = 0.5 * config.n_legs * k_p * d * d * (traj.contact > 0.5)
    return 0.5 * m * traj.zdot**2 + m * g * traj.z + spring


def free_fall_touchdown_speed(config: DropConfig) -> float:
    dh = config.drop_height - hip_height(config.geometry, config.geometry.rest_knee_angle)
    return math.sqrt(2.0 * config.body.gravity * dh)
