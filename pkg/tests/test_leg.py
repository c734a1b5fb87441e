import math

import numpy as np
import pytest

from hybridleg.controller import ControlSchedule, DelayedController
from hybridleg.leg import (
    DropConfig,
    free_fall_touchdown_speed,
    initial_state,
    run_drop,
    spring_torque,
    stance_energy,
    step_dynamics,
)
from hybridleg.metrics import settle_metrics, trajectory_mse
from hybridleg.model import BodyParams, ComplianceSplit, ConfigurationError, GRAVITY, hip_height

K = 1.6717
UNDAMPED = BodyParams(hip_damping=0.0, knee_damping=0.0)


def config(lam=1.0, freq=1000.0, duty=1.0, delay=0.0, **kw):
    return DropConfig(split=ComplianceSplit(K, lam),
                      schedule=ControlSchedule(freq, duty, delay), **kw)


def stance_segments(traj):
    c = traj.contact > 0.5
    edges = np.flatnonzero(np.diff(c.astype(int)))
    starts = [e + 1 for e in edges if c[e + 1]]
    ends = [e + 1 for e in edges if not c[e + 1]]
    return list(zip(starts, ends))


def test_config_validation():
    with pytest.raises(ConfigurationError):
        DropConfig(dt=0.0)
    with pytest.raises(ConfigurationError):
        DropConfig(spring_mode="cubic")
    with pytest.raises(ConfigurationError):
        DropConfig(contact_mode="soft")


def test_spring_torque_one_directional():
    split = ComplianceSplit(2.0, 0.5)
    assert spring_torque(split, 0.5, 0.4) == pytest.approx(-0.1)
    assert spring_torque(split, 0.3, 0.4) == 0.0
    assert spring_torque(split, 0.3, 0.4, one_directional=False) == pytest.approx(0.1)


def test_flight_is_exact_ballistic():
    cfg = config(lam=0.0, drop_height=1.5, duration=0.3)
    tr = run_drop(cfg)
    assert tr.touchdown_time is None
    assert np.allclose(tr.z, 1.5 - 0.5 * GRAVITY * tr.t**2, atol=1e-12)
    energy = stance_energy(tr, cfg)
    assert np.max(np.abs(energy - energy[0])) / energy[0] < 1e-3


def test_controller_torque_does_not_move_flight():
    a = run_drop(config(lam=0.0, drop_height=1.5, duration=0.3))
    b = run_drop(config(lam=1.0, drop_height=1.5, duration=0.3))
    assert np.array_equal(a.z, b.z)


def test_touchdown_speed():
    cfg = config()
    tr = run_drop(cfg)
    assert tr.meta["touchdown_speed"] == pytest.approx(free_fall_touchdown_speed(cfg), rel=0.01)
    dh = cfg.drop_height - hip_height(cfg.geometry, cfg.geometry.rest_knee_angle)
    assert free_fall_touchdown_speed(cfg) == pytest.approx(math.sqrt(2 * GRAVITY * dh))


def test_mid_stance_compression():
    cfg = config()
    tr = run_drop(cfg)
    rest = hip_height(cfg.geometry, cfg.geometry.rest_knee_angle)
    compression = (rest - tr.z.min()) / cfg.geometry.leg_length
    assert compression == pytest.approx(0.10, abs=0.03)


@pytest.mark.parametrize("mode", ["one_directional", "linear"])
def test_undamped_bounce_energy(mode):
    cfg = config(lam=1.0, body=UNDAMPED, spring_mode=mode)
    tr = run_drop(cfg)
    energy = stance_energy(tr, cfg)
    segments = stance_segments(tr)
    assert len(segments) >= 3
    for start, end in segments:
        assert abs(energy[end] - energy[start]) / energy[start] < 0.005


def test_reference_landing_is_viable():
    v = settle_metrics(run_drop(config()))
    assert v.viable
    assert v.final_height == pytest.approx(0.3057, abs=2e-3)


def test_deterministic():
    cfg = config(lam=0.3, freq=50, duty=0.5, delay=0.02)
    a, b = run_drop(cfg), run_drop(cfg)
    for name in a.CHANNELS:
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_lambda_continuity_at_zero_delay():
    cfg = config()
    a, b = run_drop(config(lam=0.0)), run_drop(cfg)
    for tr in (a, b):
        stance = tr.contact > 0.5
        assert np.all(tr.theta[stance] >= cfg.geometry.rest_knee_angle)
    rms = math.sqrt(trajectory_mse(a, b)) * 0.32
    assert rms / np.sqrt(np.mean(b.z**2)) < 0.02


@pytest.mark.parametrize("sched", [
    ControlSchedule(20, 0.25, 0.06), ControlSchedule(100, 0.5, 0.01), ControlSchedule(1000, 1.0, 0.0),
])
def test_spring_path_is_schedule_invariant(sched):
    cfg = config(lam=0.5).with_(schedule=sched)
    tr = run_drop(cfg)
    expect = [spring_torque(cfg.split, th, cfg.geometry.rest_knee_angle) for th in tr.theta]
    assert np.array_equal(tr.tau_spring, expect)


def test_penalty_contact_agrees_with_pinned():
    pinned = run_drop(config())
    penalty = run_drop(config(contact_mode="penalty"))
    assert trajectory_mse(pinned, penalty) < 1e-4
    assert settle_metrics(penalty).viable == settle_metrics(pinned).viable


def test_soft_leg_inverts():
    cfg = DropConfig(split=ComplianceSplit(0.05, 1.0), drop_height=1.0)
    tr = run_drop(cfg)
    assert tr.status == "inverted"
    v = settle_metrics(tr)
    assert not v.viable and v.failure_reason == "inverted"
    assert np.all(tr.tau_motor[-10:] == 0.0)


def test_step_dynamics_matches_run_drop():
    cfg = config(lam=0.4, freq=100, delay=0.015, duration=0.6)
    tr = run_drop(cfg)
    state = initial_state(cfg)
    ctrl = DelayedController(cfg.schedule, cfg.split, cfg.geometry.rest_knee_angle, cfg.dt)
    for i in range(1, len(tr)):
        state = step_dynamics(state, cfg, ctrl)
        assert (state.z, state.theta) == (tr.z[i], tr.theta[i])
