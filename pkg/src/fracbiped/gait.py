"""Reference trajectory generation for both walkers.

Two-link: quintic Hermite joint-angle sweeps between the (-27.5, 12.5)
deg endpoints. The stance profile finishes at the exchange rate v_td and
the swing profile starts at the same rate, so the reference is C^1
through the role exchange, the swing foot lifts off the slope
immediately after each impact, and the continuation past the period
boundary descends through the surface at finite speed, which keeps the
guard crossing well posed.

RABBIT: Cartesian hip/foot plan (constant hip height, constant forward
speed, sin^2 foot lift) converted through leg inverse kinematics; past
the nominal touchdown the swing-foot reference accelerates downward so
the contact event fires crisply.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phmodel.rabbit import RabbitParams

__all__ = [
    "GaitConfig",
    "Reference",
    "TwoLinkGait",
    "RabbitGait",
    "inverse_kinematics",
    "forward_leg",
    "UnreachableTargetError",
]


class UnreachableTargetError(ValueError):
    """Requested foot target outside the leg workspace."""


@dataclass
class GaitConfig:
    swing_duration: float = 1.0
    # two-link walker
    angle_low: float = np.deg2rad(-27.5)
    angle_high: float = np.deg2rad(12.5)
    exchange_rate: float = 0.3     # rad/s stance rate at touchdown = swing rate at lift-off
    # RABBIT
    hip_height: float = 0.6
    step_length: float = 0.2
    foot_lift: float = 0.05
    touchdown_accel: float = 9.0   # m/s^2 of the post-nominal descent
    phase_reset_at_impact: bool = True


@dataclass
class Reference:
    q_d: np.ndarray
    qd_d: np.ndarray


def _smoothstep5(x):
    return x * x * x * (10.0 + x * (6.0 * x - 15.0))


def _smoothstep5_d(x):
    return 30.0 * x * x * (x - 1.0) ** 2


# quintic Hermite velocity bases on [0, 1], zero end accelerations
def _hv0(t):
    return t - 6.0 * t**3 + 8.0 * t**4 - 3.0 * t**5


def _hv0_d(t):
    return 1.0 - 18.0 * t**2 + 32.0 * t**3 - 15.0 * t**4


def _hv1(t):
    return -4.0 * t**3 + 7.0 * t**4 - 3.0 * t**5


def _hv1_d(t):
    return -12.0 * t**2 + 28.0 * t**3 - 15.0 * t**4


class TwoLinkGait:
    """Joint-space gait for the two-link walker, n = 2."""

    n = 2

    def __init__(self, config: GaitConfig | None = None):
        self.config = config or GaitConfig(swing_duration=1.0)
        self.period = self.config.swing_duration
        self._span = self.config.angle_high - self.config.angle_low
        self._swap = np.array([[0.0, 1.0], [1.0, 0.0]])

    def _base(self, tau):
        cf = self.config
        T = self.period
        vT = cf.exchange_rate * T
        q1 = cf.angle_low + self._span * _smoothstep5(tau) + vT * _hv1(tau)
        q2 = cf.angle_high - self._span * _smoothstep5(tau) + vT * _hv0(tau)
        qd1 = (self._span * _smoothstep5_d(tau) + vT * _hv1_d(tau)) / T
        qd2 = (-self._span * _smoothstep5_d(tau) + vT * _hv0_d(tau)) / T
        return np.array([q1, q2]), np.array([qd1, qd2])

    def reference(self, phase: float) -> Reference:
        k = int(np.floor(phase / self.period))
        tau = phase / self.period - k
        q, qd = self._base(tau)
        if k % 2 == 1:
            q = self._swap @ q
            qd = self._swap @ qd
        return Reference(q, qd)


def inverse_kinematics(hip, foot, L: float):
    """Two-segment leg IK, knee-forward branch.

    Returns (hip angle, knee angle): the thigh angle from the downward
    vertical (positive toward +x) and the relative knee angle. The
    forward map of the result reproduces the target to round-off.
    """
    hip = np.asarray(hip, dtype=float)
    foot = np.asarray(foot, dtype=float)
    d = foot - hip
    r = float(np.hypot(d[0], d[1]))
    if r > 2.0 * L * (1.0 + 1e-12):
        raise UnreachableTargetError(f"target at distance {r:g} exceeds reach {2*L:g}")
    r = min(r, 2.0 * L)
    psi = np.arctan2(d[0], -d[1])       # leg-line angle from straight down
    gamma = np.arccos(min(1.0, r / (2.0 * L)))
    phi_hip = psi + gamma
    phi_knee = -2.0 * gamma
    return float(phi_hip), float(phi_knee)


def forward_leg(hip, phi_hip: float, phi_knee: float, L: float):
    """Foot position of a two-segment leg from the IK angles."""
    hip = np.asarray(hip, dtype=float)
    a1 = phi_hip
    a2 = phi_hip + phi_knee
    return hip + L * np.array([np.sin(a1), -np.cos(a1)]) + L * np.array([np.sin(a2), -np.cos(a2)])


def _leg_jacobian(phi_hip, phi_knee, L):
    a1 = phi_hip
    a2 = phi_hip + phi_knee
    c1 = L * np.array([np.cos(a1), np.sin(a1)])
    c2 = L * np.array([np.cos(a2), np.sin(a2)])
    return np.column_stack([c1 + c2, c2])


class RabbitGait:
    """Cartesian plan plus IK for the five-link biped, n = 5."""

    n = 5

    def __init__(self, config: GaitConfig | None = None, params: RabbitParams | None = None):
        self.config = config or GaitConfig(swing_duration=2.0)
        self.params = params or RabbitParams()
        self.period = self.config.swing_duration

    def plan(self, tau: float):
        """Stance-relative hip and swing-foot targets and velocities at phase fraction tau."""
        cf = self.config
        T = self.period
        step = cf.step_length
        hip = np.array([-step / 2 + step * tau, cf.hip_height])
        hip_v = np.array([step / T, 0.0])
        u = min(max(tau, 0.0), 1.0)
        x = -step + 2.0 * step * _smoothstep5(u)
        xv = 2.0 * step * _smoothstep5_d(u) / T if 0.0 <= tau <= 1.0 else 0.0
        if tau <= 1.0:
            y = cf.foot_lift * np.sin(np.pi * tau) ** 2
            yv = cf.foot_lift * np.pi * np.sin(2.0 * np.pi * tau) / T
        else:
            dt = (tau - 1.0) * T
            y = -0.5 * cf.touchdown_accel * dt * dt
            yv = -cf.touchdown_accel * dt
        foot = np.array([x, y])
        foot_v = np.array([xv, yv])
        return hip, hip_v, foot, foot_v

    def reference(self, phase: float) -> Reference:
        # single-period profile with built-in touchdown continuation; the
        # hybrid loop re-anchors the phase at every detected impact
        tau = phase / self.period
        hip, hip_v, foot, foot_v = self.plan(tau)
        L = self.params.L
        st_hip, st_knee = inverse_kinematics(hip, np.zeros(2), L)
        sw_hip, sw_knee = inverse_kinematics(hip, foot, L)
        q = np.array([st_hip, sw_hip, st_knee, sw_knee, 0.0])
        st_rate = np.linalg.solve(_leg_jacobian(st_hip, st_knee, L), -hip_v)
        sw_rate = np.linalg.solve(_leg_jacobian(sw_hip, sw_knee, L), foot_v - hip_v)
        qd = np.array([st_rate[0], sw_rate[0], st_rate[1], sw_rate[1], 0.0])
        return Reference(q, qd)
