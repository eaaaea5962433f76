"""Two-link walker on an inclined surface.

q = (q1, q2): support and swing leg angles from the surface normal
direction, counterclockwise positive. The walker advances in the -x
direction and climbs the slope (ground height -x tan(phi)). Link
vectors use u(theta) = (-sin theta, cos theta) from the stance contact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import ImpactSingularityError, PHState, RobotModel

__all__ = ["TwoLinkParams", "TwoLinkModel"]


@dataclass
class TwoLinkParams:
    a: float = 0.5       # lower leg segment, m
    b: float = 0.5       # upper leg segment, m
    m1: float = 5.0      # link 1 mass, kg
    m2: float = 5.0      # link 2 mass, kg
    mH: float = 10.0     # hip mass, kg
    g: float = 9.81
    slope: float = np.deg2rad(7.5)

    def __post_init__(self):
        if min(self.a, self.b, self.m1, self.m2, self.mH) <= 0.0:
            raise ValueError("lengths and masses must be positive")

    @property
    def l(self) -> float:
        return self.a + self.b


class TwoLinkModel(RobotModel):

    def __init__(self, params: TwoLinkParams | None = None):
        self.params = params or TwoLinkParams()
        self.n = 2
        self.m = 2
        self.B = np.eye(2)
        self._dn = np.array([[0.0, 1.0], [1.0, 0.0]])

    # --- dynamics ----------------------------------------------------------
    def mass_matrix(self, q):
        pr = self.params
        l = pr.l
        c12 = np.cos(q[0] - q[1])
        m12 = -pr.m2 * l * pr.a * c12
        return np.array([
            [(pr.mH + pr.m2) * l * l + pr.m1 * pr.b * pr.b, m12],
            [m12, pr.m2 * pr.a * pr.a],
        ])

    def mass_matrix_derivs(self, q):
        pr = self.params
        s12 = np.sin(q[0] - q[1])
        k = pr.m2 * pr.l * pr.a * s12
        dM = np.zeros((2, 2, 2))
        # d M12 / d q1 = +k, d M12 / d q2 = -k
        dM[0, 0, 1] = dM[0, 1, 0] = k
        dM[1, 0, 1] = dM[1, 1, 0] = -k
        return dM

    def coriolis(self, q, qdot):
        pr = self.params
        s12 = np.sin(q[0] - q[1])
        k = pr.m2 * pr.l * pr.a * s12
        return np.array([
            [0.0, -k * qdot[1]],
            [k * qdot[0], 0.0],
        ])

    def gravity(self, q):
        pr = self.params
        return np.array([
            -((pr.mH + pr.m2) * pr.l + pr.m1 * pr.b) * pr.g * np.sin(q[0]),
            pr.m2 * pr.a * pr.g * np.sin(q[1]),
        ])

    def potential(self, q):
        # reference V(0) = 0
        pr = self.params
        c1 = ((pr.mH + pr.m2) * pr.l + pr.m1 * pr.b) * pr.g
        c2 = pr.m2 * pr.a * pr.g
        return c1 * (np.cos(q[0]) - 1.0) - c2 * (np.cos(q[1]) - 1.0)

    # --- geometry ----------------------------------------------------------
    def hip_position(self, q):
        l = self.params.l
        return np.array([-l * np.sin(q[0]), l * np.cos(q[0])])

    def swing_foot_position(self, q):
        l = self.params.l
        return self.hip_position(q) - np.array([-l * np.sin(q[1]), l * np.cos(q[1])])

    def horizontal_separation(self, q) -> float:
        """L = l sin(-q1) + l sin(q2); negative when the swing foot leads."""
        l = self.params.l
        return l * (np.sin(-q[0]) + np.sin(q[1]))

    def guard_value(self, q) -> float:
        """P(q) = P1 + P_phi - P2; zero when the swing foot meets the slope."""
        l = self.params.l
        p1 = l * np.cos(-q[0])
        p2 = l * np.cos(q[1])
        return p1 + self.horizontal_separation(q) * np.tan(self.params.slope) - p2

    def guard_gradient(self, q) -> np.ndarray:
        l = self.params.l
        tphi = np.tan(self.params.slope)
        return np.array([
            -l * np.sin(q[0]) - l * np.cos(q[0]) * tphi,
            l * np.sin(q[1]) + l * np.cos(q[1]) * tphi,
        ])

    def guard(self, state: PHState) -> tuple[float, bool]:
        q = state.q
        value = self.guard_value(q)
        sep = self.horizontal_separation(q)
        qdot = self.velocity(q, state.p)
        pdot = float(self.guard_gradient(q) @ qdot)
        armed = (sep < 0.0) and (pdot < 0.0)
        return float(value), bool(armed)

    # --- impact ------------------------------------------------------------
    def delta_n(self):
        return self._dn.copy()

    def _q_plus_minus(self, q):
        pr = self.params
        a, b, l = pr.a, pr.b, pr.l
        c = np.cos(q[0] - q[1])
        qp = np.array([
            [pr.m1 * a * a - pr.m1 * l * a * c,
             -pr.m1 * l * a * c + (pr.mH + pr.m1) * l * l + pr.m2 * b * b],
            [pr.m1 * a * a, -pr.m1 * l * a * c],
        ])
        # Q-(1,1) carries the trailing-mass moment -m1 a b in addition to the
        # cos term; without it the map violates angular momentum conservation.
        qm = np.array([
            [(pr.mH * l * l + (pr.m1 + pr.m2) * l * b) * c - pr.m1 * a * b,
             -pr.m2 * a * b],
            [-pr.m1 * a * b, 0.0],
        ])
        return qp, qm

    def delta_s(self, state: PHState):
        """(Q+)^-1 Q-, mapping pre-impact to post-impact leg rates (pre-impact labels)."""
        qp, qm = self._q_plus_minus(state.q)
        if abs(np.linalg.det(qp)) < 1e-12:
            raise ImpactSingularityError("Q+ singular at impact configuration")
        return np.linalg.solve(qp, qm)
