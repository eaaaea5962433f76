"""Shared port-Hamiltonian robot model machinery.

Concrete models provide mass matrix, its configuration derivatives,
Coriolis matrix, gravity vector, potential, guard, and impact maps.
Hamiltonian quantities and the drift term are derived here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PHState",
    "RobotModel",
    "SingularMassError",
    "ImpactSingularityError",
    "christoffel_coriolis",
]

_COND_LIMIT = 1e12


class SingularMassError(RuntimeError):
    """Mass matrix numerically singular at the queried configuration."""


class ImpactSingularityError(RuntimeError):
    """Impact equations singular (Q+ or J M^-1 J^T not invertible)."""


@dataclass
class PHState:
    """Generalized positions and momenta, p = M(q) qdot."""

    q: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        if self.q.shape != self.p.shape:
            raise ValueError("q and p must have equal dimension")

    def copy(self) -> "PHState":
        return PHState(self.q.copy(), self.p.copy(), self.t)


def christoffel_coriolis(dM: np.ndarray, qdot: np.ndarray) -> np.ndarray:
    """Coriolis matrix from the mass-matrix derivative tensor.

    dM[k, i, j] = d M_ij / d q_k.  The returned C satisfies the
    skew-symmetry of (Mdot - 2C) by construction.
    """
    a = np.einsum("kij,k->ij", dM, qdot)
    b = np.einsum("jik,k->ij", dM, qdot)
    c = np.einsum("ijk,k->ij", dM, qdot)
    return 0.5 * (a + b - c)


class RobotModel:
    """Base class; subclasses set n, m, B and the dynamics evaluators."""

    n: int
    m: int
    B: np.ndarray

    # --- to be provided by subclasses -------------------------------------
    def mass_matrix(self, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def mass_matrix_derivs(self, q: np.ndarray) -> np.ndarray:
        """(n, n, n) tensor, index 0 is the differentiation coordinate."""
        raise NotImplementedError

    def coriolis(self, q: np.ndarray, qdot: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gravity(self, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def potential(self, q: np.ndarray) -> float:
        raise NotImplementedError

    def guard(self, state: PHState) -> tuple[float, bool]:
        raise NotImplementedError

    def delta_n(self) -> np.ndarray:
        raise NotImplementedError

    def delta_s(self, state: PHState) -> np.ndarray:
        """Velocity resetting matrix in pre-impact coordinates."""
        raise NotImplementedError

    # --- derived quantities ------------------------------------------------
    def velocity(self, q: np.ndarray, p: np.ndarray) -> np.ndarray:
        M = self.mass_matrix(q)
        if np.linalg.cond(M) > _COND_LIMIT:
            raise SingularMassError(f"cond(M) > {_COND_LIMIT:g} at q={q}")
        return np.linalg.solve(M, p)

    def hamiltonian(self, state: PHState) -> float:
        qdot = self.velocity(state.q, state.p)
        return 0.5 * float(state.p @ qdot) + self.potential(state.q)

    def grad_q_hamiltonian(self, state: PHState) -> np.ndarray:
        """d H / d q with analytic d(M^-1)/dq = -M^-1 dM M^-1."""
        qdot = self.velocity(state.q, state.p)
        dM = self.mass_matrix_derivs(state.q)
        kinetic = -0.5 * np.einsum("kij,i,j->k", dM, qdot, qdot)
        return kinetic + self.gravity(state.q)

    def grad_p_hamiltonian(self, state: PHState) -> np.ndarray:
        return self.velocity(state.q, state.p)

    def grad_hamiltonian(self, state: PHState) -> np.ndarray:
        return np.concatenate([self.grad_q_hamiltonian(state), self.grad_p_hamiltonian(state)])

    def drift(self, state: PHState) -> np.ndarray:
        """pdot with zero input, equal to -grad_q H."""
        return -self.grad_q_hamiltonian(state)

    def flow(self, state: PHState, tau: np.ndarray, d: np.ndarray | None = None) -> np.ndarray:
        """Time derivative of [q; p] under input tau and momentum-level disturbance d."""
        qdot = self.velocity(state.q, state.p)
        pdot = -self.grad_q_hamiltonian(state) + self.B @ tau
        if d is not None:
            pdot = pdot + d
        return np.concatenate([qdot, pdot])

    def impact(self, state: PHState) -> PHState:
        """Apply the reset map: renamed coordinates and reset momenta."""
        dn = self.delta_n()
        ds = self.delta_s(state)
        qdot_minus = self.velocity(state.q, state.p)
        q_plus = dn @ state.q
        qdot_plus = dn @ (ds @ qdot_minus)
        p_plus = self.mass_matrix(q_plus) @ qdot_plus
        return PHState(q_plus, p_plus, state.t)

    def state_from_velocity(self, q, qdot, t: float = 0.0) -> PHState:
        q = np.asarray(q, dtype=float)
        return PHState(q, self.mass_matrix(q) @ np.asarray(qdot, dtype=float), t)
