"""Two-loop tracking controller.

Outer loop: fractional PID filter on the position error producing the
commanded momentum v(t) around the reference-momentum feedforward.
Inner loop: fractional non-singular terminal sliding surface with the
equivalent control that renders sdot = -Ks3 s - Ks4 s^mu in the nominal
model, plus the estimator compensation term.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fracalc import FracOp
from .phmodel.base import PHState, RobotModel

__all__ = [
    "OuterGains",
    "SurfaceGains",
    "InnerGains",
    "TrackingController",
    "ControlStep",
    "spow",
    "ssign",
    "lyapunov_value",
    "reaching_time_bound",
]


def as_gain_matrix(value, m: int) -> np.ndarray:
    """Scalar c -> c I; sequence -> diagonal or full matrix."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return float(arr) * np.eye(m)
    if arr.ndim == 1:
        if arr.shape[0] != m:
            raise ValueError(f"diagonal gain length {arr.shape[0]} != {m}")
        return np.diag(arr)
    if arr.shape != (m, m):
        raise ValueError(f"gain shape {arr.shape} != ({m}, {m})")
    return arr


@dataclass
class OuterGains:
    alpha: float = 0.75
    Kp: object = 40.0
    Kd: object = 5.0
    Ki: object = 15.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must be in (0, 1]")


@dataclass
class SurfaceGains:
    sigma: float = 0.85
    zeta: float = 0.5
    Ks1: object = 25.0
    Ks2: object = 5.0

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")
        if not self.zeta < 1.0:
            raise ValueError("zeta must be < 1")


@dataclass
class InnerGains:
    Ks3: object = 15.0
    Ks4: object = 10.0
    mu: float = 0.75
    beta: float = 1.75
    Y: object = None  # Lyapunov weight, monitor only; None -> identity

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise ValueError("mu must be in (0, 1)")
        if not 1.0 < self.beta < 2.0:
            raise ValueError("beta must be in (1, 2)")


def spow(x: np.ndarray, p: float) -> np.ndarray:
    """Signed elementwise power |x|^p sign(x)."""
    return np.sign(x) * np.abs(x) ** p


def ssign(x: np.ndarray, eps: float = 1e-3) -> np.ndarray:
    """Smoothed sign; eps <= 0 selects the exact sign."""
    if eps <= 0.0:
        return np.sign(x)
    return np.tanh(x / eps)


def lyapunov_value(s: np.ndarray, beta: float, Y: np.ndarray | None = None) -> float:
    """V_s = (s^T Y s)^beta."""
    quad = float(s @ s) if Y is None else float(s @ Y @ s)
    return quad ** beta


def reaching_time_bound(V_s0: float, inner: InnerGains, m: int = 1) -> float:
    """Upper bound on the time to reach the sliding surface from V_s(t0)."""
    if V_s0 < 0.0:
        raise ValueError("V_s0 must be non-negative")
    if V_s0 == 0.0:
        return 0.0
    a = float(np.min(np.linalg.eigvalsh(as_gain_matrix(inner.Ks3, m))))
    b = float(np.min(np.linalg.eigvalsh(as_gain_matrix(inner.Ks4, m))))
    expo = (1.0 - inner.mu) / inner.beta
    return np.log((a * V_s0 ** expo + b) / b) / (2.0 * a * (1.0 - inner.mu))


@dataclass
class ControlStep:
    """Per-sample controller snapshot handed to the estimators."""

    t: float
    e_x: np.ndarray
    v: np.ndarray
    e_v: np.ndarray
    s: np.ndarray
    w: np.ndarray          # Ks3 s + Ks4 spow(s, mu)
    p_act: np.ndarray
    grad_act: np.ndarray   # actuated rows of grad_q H
    tau_eq: np.ndarray = field(default=None)


class TrackingController:
    """Samples at a fixed rate; fractional memories reset at impacts."""

    def __init__(self, model: RobotModel, outer: OuterGains | None = None,
                 surface: SurfaceGains | None = None, inner: InnerGains | None = None,
                 step: float = 1e-3, sign_eps: float = 1e-3,
                 window: int = 10_000):
        self.model = model
        self.outer = outer or OuterGains()
        self.surface = surface or SurfaceGains()
        self.inner = inner or InnerGains()
        self.step = float(step)
        self.sign_eps = float(sign_eps)
        m = model.m
        self.m = m
        if np.linalg.matrix_rank(model.B) < m:
            raise ValueError("allocation matrix B is rank deficient")
        self.P = np.linalg.pinv(model.B)
        self.Kp = as_gain_matrix(self.outer.Kp, m)
        self.Kd = as_gain_matrix(self.outer.Kd, m)
        self.Ki = as_gain_matrix(self.outer.Ki, m)
        self.Ks1 = as_gain_matrix(self.surface.Ks1, m)
        self.Ks2 = as_gain_matrix(self.surface.Ks2, m)
        self.Ks3 = as_gain_matrix(self.inner.Ks3, m)
        self.Ks4 = as_gain_matrix(self.inner.Ks4, m)
        a, sg = self.outer.alpha, self.surface.sigma
        self._op_da = FracOp(a, self.step, window)                       # D^alpha e_x
        self._op_ia = FracOp(-a, self.step, window)                      # D^-alpha e_x
        self._op_ds = FracOp(sg, self.step, window)                      # D^sigma e_v
        self._op_br = FracOp(1.0 - sg, self.step, window,
                             subtract_origin=False)                      # D^(1-sigma) bracket
        self.s = np.zeros(m)
        self._v_prev: np.ndarray | None = None
        self._last: ControlStep | None = None

    def reset(self) -> None:
        """Clear all fractional memories (called at impact times)."""
        for op in (self._op_da, self._op_ia, self._op_ds, self._op_br):
            op.reset()
        self.s = np.zeros(self.m)
        self._v_prev = None
        self._last = None

    # --- one sample ---------------------------------------------------------
    def begin_step(self, state: PHState, ref) -> ControlStep:
        P = self.P
        e = P @ (ref.q_d - state.q)
        p_act = P @ state.p
        p_ff = P @ (self.model.mass_matrix(ref.q_d) @ ref.qd_d)
        v = p_ff + self.Kp @ e + self.Kd @ self._op_da.push(e) + self.Ki @ self._op_ia.push(e)
        e_v = p_act - v
        sz = self.Ks1 @ spow(e_v, self.surface.zeta) + self.Ks2 @ ssign(e_v, self.sign_eps)
        g = self._op_ds.push(e_v) + sz
        self.s = self.s + self.step * g
        w = self.Ks3 @ self.s + self.Ks4 @ spow(self.s, self.inner.mu)
        filt = self._op_br.push(sz + w)
        grad_act = P @ self.model.grad_q_hamiltonian(state)
        if self._v_prev is None:
            vdot = np.zeros(self.m)
        else:
            vdot = (v - self._v_prev) / self.step
        self._v_prev = v
        tau_eq = -(-grad_act + filt - vdot)
        rec = ControlStep(t=state.t, e_x=e, v=v, e_v=e_v, s=self.s.copy(), w=w,
                          p_act=p_act, grad_act=grad_act, tau_eq=tau_eq)
        self._last = rec
        return rec

    def finish_step(self, d_hat: np.ndarray | None = None) -> np.ndarray:
        """Total control: tau_eq minus the reconstructed disturbance."""
        rec = self._last
        if rec is None:
            raise RuntimeError("begin_step must run before finish_step")
        if d_hat is None:
            return rec.tau_eq.copy()
        return rec.tau_eq - np.asarray(d_hat, dtype=float)
