"""Sampled virtual-spring knee controller with sensorimotor delay.

The controller ticks at ``frequency``. At each tick it reads the knee angle
as it was ``delay`` seconds earlier, computes the virtual-spring torque and
holds it for ``duty_cycle`` of the control period, then outputs zero until the
next tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import ComplianceSplit, ConfigurationError

# slack for aligning float timestamps to control ticks
_TICK_EPS = 1e-9


@dataclass(frozen=True)
class ControlSchedule:
    frequency: float = 1000.0
    duty_cycle: float = 1.0
    delay: float = 0.0
    min_activation: float = 0.001

    def __post_init__(self):
        if not self.frequency > 0:
            raise ConfigurationError(f"frequency must be positive, got {self.frequency!r}")
        if not 0.0 < self.duty_cycle <= 1.0:
            raise ConfigurationError(f"duty_cycle must lie in (0, 1], got {self.duty_cycle!r}")
        if not self.delay >= 0:
            raise ConfigurationError(f"delay must be non-negative, got {self.delay!r}")
        if self.min_activation < 0:
            raise ConfigurationError("min_activation must be non-negative")

    @property
    def dt_control(self) -> float:
        return 1.0 / self.frequency

    @property
    def dt_activation(self) -> float:
        return min(max(self.duty_cycle * self.dt_control, self.min_activation), self.dt_control)


class DelayLine:
    """Fixed-capacity history of (time, angle) samples.

    Lookups interpolate linearly between the two bracketing samples; queries
    older than the stored history return the oldest sample, queries newer than
    the last sample return the last one.
    """

    def __init__(self, capacity: int):
        if capacity < 2:
            raise ValueError("capacity must be at least 2")
        self.capacity = int(capacity)
        self._t = [0.0] * self.capacity
        self._x = [0.0] * self.capacity
        self._start = 0
        self._size = 0

    @classmethod
    def for_delay(cls, delay: float, physics_dt: float) -> "DelayLine":
        return cls(int(math.ceil(delay / physics_dt)) + 3)

    def __len__(self):
        return self._size

    def _index(self, i: int) -> int:
        return (self._start + i) % self.capacity

    def record(self, t: float, theta: float) -> "DelayLine":
        if self._size and not t > self._t[self._index(self._size - 1)]:
            raise ValueError(
                f"timestamp {t!r} is not after the last sample "
                f"{self._t[self._index(self._size - 1)]!r}"
            )
        if self._size < self.capacity:
            j = self._index(self._size)
            self._size += 1
        else:
            j = self._start
            self._start = (self._start + 1) % self.capacity
        self._t[j] = t
        self._x[j] = theta
        return self

    def query(self, t: float) -> float:
        if not self._size:
            raise LookupError("delay line is empty")
        ts, xs, idx = self._t, self._x, self._index
        first = idx(0)
        if t <= ts[first]:
            return xs[first]
        last = idx(self._size - 1)
        if t >= ts[last]:
            return xs[last]
        # binary search for the last sample with time <= t
        lo, hi = 0, self._size - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ts[idx(mid)] <= t:
                lo = mid
            else:
                hi = mid
        a, b = idx(lo), idx(hi)
        ta = ts[a]
        if t == ta:
            return xs[a]
        w = (t - ta) / (ts[b] - ta)
        return xs[a] + w * (xs[b] - xs[a])


def motor_torque(split: ComplianceSplit, theta_feedback: float, theta_d: float) -> float:
    """Virtual-spring knee torque; restoring, so opposite in sign to the error."""
    return -split.k_active() * (theta_feedback - theta_d)


class DelayedController:
    """Stateful sampled controller: owns a delay line and the held command."""

    def __init__(self, schedule: ControlSchedule, split: ComplianceSplit, theta_d: float,
                 physics_dt: float = 0.001):
        self.schedule = schedule
        self.split = split
        self.theta_d = theta_d
        self.physics_dt = physics_dt
        self.line = DelayLine.for_delay(schedule.delay, physics_dt)
        self._period = schedule.dt_control
        self._window = schedule.dt_activation
        self._tick = -1
        self._held = 0.0

    def record(self, t: float, theta: float) -> None:
        self.line.record(t, theta)

    def torque(self, t: float) -> float:
        """Torque applied over the physics step starting at ``t``.

        Zero before the first tick. When the activation window ends inside
        the step, the held torque is scaled by the covered fraction, so the
        delivered impulse does not depend on the physics step size.
        """
        if t < -_TICK_EPS or not len(self.line):
            return 0.0
        k = math.floor(t / self._period + _TICK_EPS)
        if k != self._tick:
            self._tick = k
            t_k = k * self._period
            fb = self.line.query(t_k - self.schedule.delay)
            self._held = motor_torque(self.split, fb, self.theta_d)
        return self._held * _window_overlap(t - self._tick * self._period, self._window,
                                            self.physics_dt)


def _window_overlap(phase: float, window: float, step: float) -> float:
    """Fraction of ``[phase, phase + step)`` inside the window ``[0, window)``."""
    if phase >= window - _TICK_EPS:
        return 0.0
    if phase + step <= window + _TICK_EPS:
        return 1.0
    return (window - phase) / step


def scheduled_torque(sched: ControlSchedule, line: DelayLine, t: float,
                     split: ComplianceSplit, theta_d: float, physics_dt: float = 0.001) -> float:
    """Stateless form of :meth:`DelayedController.torque`.

    Recomputes the most recent tick from ``line`` on every call, which is
    handy for inspection but slower than the controller object. ``line``
    must hold at least ``delay + 1/frequency`` of history.
    """
    if t < -_TICK_EPS or not len(line):
        return 0.0
    period = sched.dt_control
    k = math.floor(t / period + _TICK_EPS)
    share = _window_overlap(t - k * period, sched.dt_activation, physics_dt)
    if share == 0.0:
        return 0.0
    return share * motor_torque(split, line.query(k * period - sched.delay), theta_d)
