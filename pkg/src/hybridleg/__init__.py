"""Desk-scale laboratory for hybrid passive/active knee compliance under delay.

Modules
-------
model       compliance split, leg geometry, delay scaling law, trajectories
pendulum    Pade-linearized delayed pendulum: poles and step responses
controller  sampled, delayed virtual-spring knee controller
leg         drop-landing simulation of the two-segment leg
quadruped   four legs sharing one body height
metrics     settling time, viability, trajectory MSE
sweep       viability maps over (lambda, delay, frequency, duty cycle)
cli         ``hybridleg`` command line
"""

__version__ = "0.1.0"

from .controller import ControlSchedule, DelayedController, DelayLine, motor_torque, scheduled_torque
from .leg import DropConfig, LegState, run_drop, spring_torque, step_dynamics
from .metrics import LandingVerdict, settle_metrics, trajectory_mse
from .model import (
    BodyParams,
    ComplianceSplit,
    ConfigurationError,
    LegGeometry,
    Trajectory,
    biological_delay,
    hip_height,
    rotational_from_linear,
    split_stiffness,
)
from .pendulum import PendulumParams, characteristic_polynomial, pade3, poles, step_response
from .quadruped import QuadrupedConfig, load_cases, run_quadruped_case
from .sweep import SweepGrid, ViabilityMap, emit_map, run_sweep
