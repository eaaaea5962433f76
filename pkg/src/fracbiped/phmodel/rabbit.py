"""Five-link planar RABBIT-class biped, stance foot pinned.

Coordinates: q1, q2 = stance/swing femur angles relative to the torso;
q3, q4 = stance/swing knee angles relative to the femurs; q5 = torso
absolute angle from vertical. The dynamics are assembled in absolute
link angles theta = A q (constant A), where every link COM is a fixed
linear combination of the link unit vectors u(theta) = (-sin, cos), so
M(theta)_ij = beta_ij cos(theta_i - theta_j) + I_i delta_ij with a
constant coupling matrix beta. Rotor inertia is added on the actuated
diagonal in joint space. Walking direction is +x on flat ground.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import ImpactSingularityError, PHState, RobotModel, christoffel_coriolis

__all__ = ["RabbitParams", "RabbitModel"]


@dataclass
class RabbitParams:
    L_T: float = 0.63    # torso length, m
    L: float = 0.40      # thigh and shank length, m
    m_T: float = 12.0
    m_t: float = 6.8
    m_s: float = 3.2
    I_T: float = 1.33
    I_t: float = 0.47
    I_s: float = 0.20
    I_a: float = 0.83    # motor rotor inertia on each actuated joint
    g: float = 9.81

    def __post_init__(self):
        vals = [self.L_T, self.L, self.m_T, self.m_t, self.m_s,
                self.I_T, self.I_t, self.I_s, self.I_a]
        if min(vals) <= 0.0:
            raise ValueError("all RABBIT parameters must be positive")


# theta ordering: 0 stance shank, 1 stance thigh, 2 torso, 3 swing thigh, 4 swing shank
_A = np.array([
    [1.0, 0.0, 1.0, 0.0, 1.0],
    [1.0, 0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, 0.0, 0.0, 1.0],
    [0.0, 1.0, 0.0, 0.0, 1.0],
    [0.0, 1.0, 0.0, 1.0, 1.0],
])

_DELTA_N = np.array([
    [0.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 1.0],
])


def _u(theta):
    return np.stack([-np.sin(theta), np.cos(theta)], axis=-1)


def _du(theta):
    return np.stack([-np.cos(theta), -np.sin(theta)], axis=-1)


class RabbitModel(RobotModel):

    def __init__(self, params: RabbitParams | None = None):
        self.params = pr = params or RabbitParams()
        self.n = 5
        self.m = 5
        # Eq-style inverse of the allocation matrix requires full actuation;
        # the four joint torques are columns 0..3, the torso column keeps the
        # torso reference trackable (see decisions ledger).
        self.B = np.eye(5)
        L, LT = pr.L, pr.L_T
        # COM offsets: row = link (s-shank, s-thigh, torso, w-thigh, w-shank),
        # column = theta index; COM at link midpoints.
        a = np.array([
            [L / 2, 0.0, 0.0, 0.0, 0.0],
            [L, L / 2, 0.0, 0.0, 0.0],
            [L, L, LT / 2, 0.0, 0.0],
            [L, L, 0.0, -L / 2, 0.0],
            [L, L, 0.0, -L, -L / 2],
        ])
        masses = np.array([pr.m_s, pr.m_t, pr.m_T, pr.m_t, pr.m_s])
        self._beta = np.einsum("k,ki,kj->ij", masses, a, a)
        self._wg = masses @ a          # gravity weights per theta
        self._Ilink = np.array([pr.I_s, pr.I_t, pr.I_T, pr.I_t, pr.I_s])
        self._rotor = np.diag([pr.I_a] * 4 + [0.0])
        self._A = _A
        self.total_mass = float(masses.sum() )

    # --- kinematics ----------------------------------------------------------
    def absolute_angles(self, q):
        return self._A @ q

    def hip_position(self, q):
        th = self.absolute_angles(q)
        L = self.params.L
        return L * (_u(th[0]) + _u(th[1]))

    def swing_foot_position(self, q):
        th = self.absolute_angles(q)
        L = self.params.L
        return self.hip_position(q) - L * (_u(th[3]) + _u(th[4]))

    def swing_foot_jacobian(self, q):
        th = self.absolute_angles(q)
        L = self.params.L
        J_theta = np.zeros((2, 5))
        J_theta[:, 0] = L * _du(th[0])
        J_theta[:, 1] = L * _du(th[1])
        J_theta[:, 3] = -L * _du(th[3])
        J_theta[:, 4] = -L * _du(th[4])
        return J_theta @ self._A

    # --- dynamics --------------------------------------------------------------
    def _mass_theta(self, th):
        dth = th[:, None] - th[None, :]
        return self._beta * np.cos(dth) + np.diag(self._Ilink)

    def mass_matrix(self, q):
        th = self.absolute_angles(q)
        return self._A.T @ self._mass_theta(th) @ self._A + self._rotor

    def mass_matrix_derivs(self, q):
        th = self.absolute_angles(q)
        dth = th[:, None] - th[None, :]
        S = self._beta * np.sin(dth)
        # dM_theta/dtheta_l [i,j] = -S_ij (delta_il - delta_jl)
        dM_theta = np.zeros((5, 5, 5))
        for l in range(5):
            dM_theta[l, l, :] = -S[l, :]
            dM_theta[l, :, l] += S[:, l]
        dM_mid = np.einsum("lab,lk->kab", dM_theta, self._A)
        return np.einsum("ai,kab,bj->kij", self._A, dM_mid, self._A)

    def coriolis(self, q, qdot):
        return christoffel_coriolis(self.mass_matrix_derivs(q), qdot)

    def gravity(self, q):
        th = self.absolute_angles(q)
        return self._A.T @ (-self._wg * self.params.g * np.sin(th))

    def potential(self, q):
        th = self.absolute_angles(q)
        return float((self._wg * self.params.g) @ (np.cos(th) - 1.0))

    # --- guard and impact --------------------------------------------------------
    def guard(self, state: PHState) -> tuple[float, bool]:
        q = state.q
        foot = self.swing_foot_position(q)
        qdot = self.velocity(q, state.p)
        vel = self.swing_foot_jacobian(q) @ qdot
        armed = (foot[0] > 0.0) and (vel[1] < 0.0)
        return float(foot[1]), bool(armed)

    def delta_n(self):
        return _DELTA_N.copy()

    def delta_s(self, state: PHState):
        """I - M^-1 J^T (J M^-1 J^T)^-1 J at the pre-impact configuration."""
        q = state.q
        M = self.mass_matrix(q)
        J = self.swing_foot_jacobian(q)
        Minv_Jt = np.linalg.solve(M, J.T)
        JMJ = J @ Minv_Jt
        if np.linalg.cond(JMJ) > 1e12:
            raise ImpactSingularityError("J M^-1 J^T singular at impact")
        return np.eye(5) - Minv_Jt @ np.linalg.solve(JMJ, J)
