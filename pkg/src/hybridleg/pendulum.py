"""Linearized pendulum with delayed virtual-spring feedback.

Closed loop, for a step in the commanded equilibrium ``theta_d``::

    I th'' + B th' + (K_p + m g l)(th - th_d) = -K_a (th(t - t_d) - th_d)

The delay is either integrated directly (fixed-step RK4 over the stored
history) or replaced by a third-order Pade approximant, which turns the
characteristic equation into a degree-5 polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import polynomial as P

from .model import GRAVITY, ComplianceSplit, ConfigurationError

# reduced-order model parameters (m, K_total, B); l and I are free choices
REDUCED_MASS = 0.5
REDUCED_STIFFNESS = 1.15
REDUCED_DAMPING = 0.14
DEFAULT_COM_DISTANCE = 0.16

UNSTABLE_FACTOR = 10.0
# below this the approximant only adds parasitic poles beyond 1e9 rad/s
NEGLIGIBLE_DELAY = 1e-9
SETTLE_BAND = 0.02


@dataclass(frozen=True)
class PendulumParams:
    inertia: float
    mass: float
    com_distance: float
    damping: float
    split: ComplianceSplit
    delay: float = 0.0
    theta_d: float = 0.0
    gravity: float = GRAVITY

    def __post_init__(self):
        if not self.inertia > 0:
            raise ConfigurationError("inertia must be positive")
        if self.mass < 0 or self.com_distance < 0 or self.damping < 0:
            raise ConfigurationError("mass, com_distance and damping must be non-negative")
        if not self.delay >= 0:
            raise ConfigurationError("delay must be non-negative")

    @property
    def instantaneous_stiffness(self) -> float:
        """Spring plus linearized gravity; acts without delay."""
        return self.split.k_passive() + self.mass * self.gravity * self.com_distance

    def with_(self, **changes) -> "PendulumParams":
        return replace(self, **changes)


def reduced_params(lambda_passive: float, delay: float = 0.0,
                com_distance: float = DEFAULT_COM_DISTANCE,
                inertia: float | None = None) -> PendulumParams:
    """Reduced-order model defaults; point-mass inertia unless given."""
    if inertia is None:
        inertia = REDUCED_MASS * com_distance**2
    return PendulumParams(inertia=inertia, mass=REDUCED_MASS, com_distance=com_distance,
                          damping=REDUCED_DAMPING,
                          split=ComplianceSplit(REDUCED_STIFFNESS, lambda_passive),
                          delay=delay)


def pade3(t_d: float) -> tuple[np.ndarray, np.ndarray]:
    """(3,3) Pade approximant of exp(-t_d s).

    Returns ``(num, den)`` coefficient arrays in ascending powers of s,
    normalized so that ``num[0] == den[0] == 1``.
    """
    if not t_d >= 0:
        raise ValueError(f"delay must be non-negative, got {t_d!r}")
    c = np.array([1.0, t_d / 2.0, t_d**2 / 10.0, t_d**3 / 120.0])
    sign = np.array([1.0, -1.0, 1.0, -1.0])
    return c * sign, c


@dataclass(frozen=True)
class CharacteristicPolynomial:
    """Real polynomial, coefficients in ascending degree."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.trim_zeros(np.asarray(self.coefficients, dtype=float), "b")
        object.__setattr__(self, "coefficients", c)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, s):
        return P.polyval(s, self.coefficients)


def _delay_factors(delay: float) -> tuple[np.ndarray, np.ndarray]:
    if delay < NEGLIGIBLE_DELAY:
        return np.ones(1), np.ones(1)
    return pade3(delay)


def characteristic_polynomial(p: PendulumParams) -> CharacteristicPolynomial:
    num, den = _delay_factors(p.delay)
    plant = np.array([p.instantaneous_stiffness, p.damping, p.inertia])
    coeffs = P.polyadd(P.polymul(plant, den), p.split.k_active() * num)
    return CharacteristicPolynomial(coeffs)


def transfer_function(p: PendulumParams, command_delayed: bool = False):
    """Pade-approximated closed loop theta/theta_d, ascending coefficients.

    With ``command_delayed`` the active path acts on the delayed error
    (command delayed together with the feedback); otherwise only the
    feedback is delayed.
    """
    num, den = _delay_factors(p.delay)
    k0, ka = p.instantaneous_stiffness, p.split.k_active()
    if command_delayed:
        numerator = P.polyadd(k0 * den, ka * num)
    else:
        numerator = (k0 + ka) * den
    return np.trim_zeros(numerator, "b"), characteristic_polynomial(p).coefficients


@dataclass(frozen=True)
class PoleSet:
    roots: np.ndarray

    @property
    def dominant(self) -> complex:
        return complex(self.roots[np.argmax(self.roots.real)])

    @property
    def max_real(self) -> float:
        return float(np.max(self.roots.real))

    def __len__(self):
        return len(self.roots)


def companion_matrix(coefficients) -> np.ndarray:
    """Companion matrix of the polynomial with ascending ``coefficients``."""
    c = np.trim_zeros(np.asarray(coefficients, dtype=float), "b")
    n = len(c) - 1
    if n < 1:
        raise ValueError("polynomial must have degree >= 1")
    m = np.zeros((n, n))
    m[1:, :-1] = np.eye(n - 1)
    m[:, -1] = -c[:-1] / c[-1]
    return m


def _polish(c: np.ndarray, r: complex, iterations: int = 3) -> complex:
    dc = P.polyder(c)
    for _ in range(iterations):
        d = P.polyval(r, dc)
        if d == 0:
            break
        step = P.polyval(r, c) / d
        if not np.isfinite(step):
            break
        r -= step
    return r


def _conjugate_close(roots: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Snap near-real roots to the real axis and pair the rest exactly."""
    out = []
    rest = list(roots)
    while rest:
        r = rest.pop(0)
        scale = max(1.0, abs(r))
        if abs(r.imag) <= tol * scale:
            out.append(complex(r.real, 0.0))
            continue
        j = min(range(len(rest)), key=lambda k: abs(rest[k] - r.conjugate()), default=None)
        if j is None or abs(rest[j] - r.conjugate()) > 1e-6 * scale:
            out.append(complex(r))
            continue
        mate = rest.pop(j)
        re = 0.5 * (r.real + mate.real)
        im = 0.5 * (abs(r.imag) + abs(mate.imag))
        out.extend([complex(re, im), complex(re, -im)])
    return np.array(sorted(out, key=lambda z: (z.real, z.imag)))


def polynomial_roots(coefficients) -> np.ndarray:
    c = np.trim_zeros(np.asarray(coefficients, dtype=float), "b")
    if c.size == 0 or not np.any(c):
        raise ValueError("degenerate (all-zero) polynomial")
    if c.size == 1:
        return np.array([], dtype=complex)
    roots = np.linalg.eigvals(companion_matrix(c)).astype(complex)
    roots = np.array([_polish(c, r) for r in roots])
    return _conjugate_close(roots)


def poles(p: PendulumParams) -> PoleSet:
    return PoleSet(polynomial_roots(characteristic_polynomial(p).coefficients))


def dominant_real_parts(delays, lambda_passive: float, **kwargs) -> np.ndarray:
    return np.array([poles(reduced_params(lambda_passive, float(d), **kwargs)).max_real
                     for d in delays])


def critical_delay(lambda_passive: float, max_delay: float = 0.5, resolution: float = 1e-3,
                   **kwargs) -> float | None:
    """Smallest delay at which the dominant pole reaches the imaginary axis.

    Scans ``[0, max_delay]`` on a ``resolution`` grid, then bisects the first
    sign change. Returns ``None`` if the system stays stable over the scan.
    """
    def re(d):
        return poles(reduced_params(lambda_passive, d, **kwargs)).max_real

    prev_d, prev = 0.0, re(0.0)
    if prev >= 0:
        return 0.0
    n = int(round(max_delay / resolution))
    for i in range(1, n + 1):
        d = i * resolution
        cur = re(d)
        if cur >= 0:
            lo, hi = prev_d, d
            for _ in range(50):
                mid = 0.5 * (lo + hi)
                if re(mid) >= 0:
                    hi = mid
                else:
                    lo = mid
            return hi
        prev_d, prev = d, cur
    return None


@dataclass
class StepResponse:
    t: np.ndarray
    theta: np.ndarray
    step: float
    diverged: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def final(self) -> float:
        return self.step


def step_response(p: PendulumParams, step: float = 1.0, t_end: float = 2.0,
                  dt: float = 1e-3, command_delayed: bool = False) -> StepResponse:
    """Integrate the delayed linear pendulum for a step in ``theta_d``.

    Fixed-step RK4; the delayed angle at each stage is read from the already
    computed history with cubic Hermite interpolation (the stored rates are
    the derivatives). Before t=0 the pendulum rests at the old equilibrium.
    """
    if not dt > 0 or not t_end > 0:
        raise ConfigurationError("dt and t_end must be positive")
    tau = p.delay
    if tau > 0 and dt > tau * (1 + 1e-12):
        raise ConfigurationError(f"dt={dt} must not exceed the delay {tau}")
    n = int(round(t_end / dt)) + 1
    th = np.zeros(n)
    om = np.zeros(n)
    th0 = p.theta_d
    th[0] = th0
    target = th0 + step
    inv_i = 1.0 / p.inertia
    b, k0, ka = p.damping, p.instantaneous_stiffness, p.split.k_active()

    def delayed(t):
        """theta(t) for t <= current time, from history."""
        if t <= 0.0:
            return th0
        x = t / dt
        i = int(math.floor(x))
        if i >= n - 1:
            i = n - 2
        s = x - i
        if s <= 1e-12:
            return th[i]
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return h00 * th[i] + h10 * dt * om[i] + h01 * th[i + 1] + h11 * dt * om[i + 1]

    def command(t):
        if command_delayed:
            return target if t - tau >= 0 else th0
        return target

    def accel(t, x, v):
        fb = delayed(t - tau) if tau > 0 else x
        return inv_i * (-b * v - k0 * (x - target) - ka * (fb - command(t)))

    diverged = False
    bound = UNSTABLE_FACTOR * abs(step) * 1e6 + 1.0
    for i in range(n - 1):
        t = i * dt
        x, v = th[i], om[i]
        k1x, k1v = v, accel(t, x, v)
        k2x, k2v = v + 0.5 * dt * k1v, accel(t + 0.5 * dt, x + 0.5 * dt * k1x, v + 0.5 * dt * k1v)
        k3x, k3v = v + 0.5 * dt * k2v, accel(t + 0.5 * dt, x + 0.5 * dt * k2x, v + 0.5 * dt * k2v)
        k4x, k4v = v + dt * k3v, accel(t + dt, x + dt * k3x, v + dt * k3v)
        th[i + 1] = x + dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        om[i + 1] = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not (math.isfinite(th[i + 1]) and abs(th[i + 1] - target) < bound):
            diverged = True
            th[i + 1:] = np.nan
            om[i + 1:] = np.nan
            break
    resp = StepResponse(np.arange(n) * dt, th - th0, step, diverged)
    resp.meta["omega"] = om
    return resp


def pade_step_response(p: PendulumParams, step: float = 1.0, t_end: float = 2.0,
                       dt: float = 1e-3, command_delayed: bool = False) -> StepResponse:
    """Step response of the Pade-approximated (rational) closed loop."""
    from scipy import signal

    num, den = transfer_function(p, command_delayed)
    t = np.arange(int(round(t_end / dt)) + 1) * dt
    sys = signal.lti(num[::-1], den[::-1])
    _, y = signal.step(sys, T=t)
    y = step * np.asarray(y)
    return StepResponse(t, y, step, not np.all(np.isfinite(y)))


def classify_step(resp: StepResponse, band: float = SETTLE_BAND) -> str:
    """``'unstable'``, ``'settled'`` or ``'oscillating'``.

    Unstable if the response ever strays more than ten step magnitudes from
    its final value or goes non-finite; settled if it ends inside a
    ``band``-fraction of the step around the final value.
    """
    if resp.diverged or not np.all(np.isfinite(resp.theta)):
        return "unstable"
    err = np.abs(resp.theta - resp.final)
    if np.any(err > UNSTABLE_FACTOR * abs(resp.step)):
        return "unstable"
    if err[-1] <= band * abs(resp.step) and step_settling_time(resp, band) < resp.t[-1]:
        return "settled"
    return "oscillating"


def step_settling_time(resp: StepResponse, band: float = SETTLE_BAND) -> float:
    err = np.abs(resp.theta - resp.final)
    outside = np.nonzero(~(err <= band * abs(resp.step)))[0]
    if outside.size == 0:
        return 0.0
    if outside[-1] == len(err) - 1:
        return math.inf
    return float(resp.t[outside[-1] + 1])
