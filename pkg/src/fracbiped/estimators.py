"""Online disturbance reconstruction.

Two estimators: the dynamic-free fractional one, built purely from the
sliding-surface signal, and the adaptive observer driven by the plant
quantities and the smoothed sign of the surface. Both are reset at
impact times so the reconstruction restarts from zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .controller import ControlStep, as_gain_matrix, ssign
from .fracalc import FracOp

__all__ = [
    "FractionalEstimator",
    "AdaptiveEstimator",
    "GainCertificate",
    "check_gains",
]


class FractionalEstimator:
    """d_hat = (1/rho) [ D^-1(Ks3 s + Ks4 s^mu) + D^(1-sigma) s ]."""

    name = "fractional"

    def __init__(self, rho: float = 0.1, sigma: float = 0.85, step: float = 1e-3,
                 window: int = 10_000):
        if rho <= 0.0:
            raise ValueError("rho must be positive")
        self.rho = float(rho)
        self.step = float(step)
        self._op_int = FracOp(-1.0, step, window)
        self._op_frac = FracOp(1.0 - sigma, step, window, subtract_origin=False)
        self._last = None

    def reset(self) -> None:
        self._op_int.reset()
        self._op_frac.reset()
        self._last = None

    def estimate(self, rec: ControlStep) -> np.ndarray:
        d_hat = (self._op_int.push(rec.w) + self._op_frac.push(rec.s)) / self.rho
        self._last = d_hat
        return d_hat

    def advance(self, rec: ControlStep, tau: np.ndarray) -> None:
        pass  # stateless beyond the operator memories


class AdaptiveEstimator:
    """Observer d_hat = phi + Ke1 p_act with phi driven by plant quantities.

    The internal state is advanced by forward Euler so that the
    estimation error obeys ddot_tilde = -Ke1 d_tilde - Ke2 ssign(s) + ddot
    along the momentum dynamics; phi is re-initialized at impacts so the
    reconstruction restarts at zero.
    """

    name = "adaptive"

    def __init__(self, m: int, Ke1=12.5, Ke2=7.5, step: float = 1e-3,
                 sign_eps: float = 1e-3):
        self.m = int(m)
        self.Ke1 = as_gain_matrix(Ke1, self.m)
        self.Ke2 = as_gain_matrix(Ke2, self.m)
        self.step = float(step)
        self.sign_eps = float(sign_eps)
        self._phi: np.ndarray | None = None
        self._last: np.ndarray | None = None

    def reset(self) -> None:
        self._phi = None
        self._last = None

    def estimate(self, rec: ControlStep) -> np.ndarray:
        if self._phi is None:
            self._phi = -self.Ke1 @ rec.p_act  # so that d_hat(t0) = 0
        d_hat = self._phi + self.Ke1 @ rec.p_act
        self._last = d_hat
        return d_hat

    def advance(self, rec: ControlStep, tau: np.ndarray) -> None:
        if self._phi is None or self._last is None:
            raise RuntimeError("estimate must run before advance")
        phidot = self.Ke1 @ (rec.grad_act - tau - self._last) \
            + self.Ke2 @ ssign(rec.s, self.sign_eps)
        self._phi = self._phi + self.step * phidot


@dataclass
class GainCertificate:
    """Parameter-selection conditions for the adaptive estimator."""

    kappa: float
    vartheta: float
    l_d: float
    ke1_matches: bool
    ke2_matches: bool
    lambda_min_ks2: float
    threshold: float
    margin: float
    passed: bool
    mu_warning: bool = False

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"gain certificate: {status}",
            f"  Ke1 = 0.5 Ks1          : {'ok' if self.ke1_matches else 'violated'}",
            f"  Ke2 = vartheta Ks2     : {'ok' if self.ke2_matches else 'violated'} (vartheta={self.vartheta:g})",
            f"  lambda_min(Ks2) >= thr : {self.lambda_min_ks2:g} vs {self.threshold:g} "
            f"(margin {self.margin:+g}, kappa={self.kappa:g}, l_d={self.l_d:g})",
        ]
        if self.mu_warning:
            lines.append("  note: finite-time proof assumes mu = 0.5; configured mu differs")
        return "\n".join(lines)


def check_gains(Ks1, Ks2, Ke1, Ke2, kappa: float, vartheta: float, l_d: float,
                mu: float | None = None, m: int = 2, tol: float = 1e-9) -> GainCertificate:
    """Evaluate the adaptive-estimator design conditions (boundary inclusive)."""
    if min(kappa, vartheta) <= 0.0 or l_d < 0.0:
        raise ValueError("kappa, vartheta must be positive and l_d non-negative")
    Ks1 = as_gain_matrix(Ks1, m)
    Ks2 = as_gain_matrix(Ks2, m)
    Ke1 = as_gain_matrix(Ke1, m)
    Ke2 = as_gain_matrix(Ke2, m)
    ke1_ok = bool(np.max(np.abs(Ke1 - 0.5 * Ks1)) <= tol)
    ke2_ok = bool(np.max(np.abs(Ke2 - vartheta * Ks2)) <= tol)
    lam = float(np.min(np.linalg.eigvalsh(Ks2)))
    thr = ((kappa + 4.0 * vartheta ** 2) ** 2 + 4.0 * kappa * l_d
           + 4.0 * l_d ** 2 + 4.0 * vartheta ** 2) / (4.0 * vartheta * kappa)
    margin = lam - thr
    passed = ke1_ok and ke2_ok and margin >= -tol
    warn = mu is not None and abs(mu - 0.5) > 1e-12
    return GainCertificate(kappa=kappa, vartheta=vartheta, l_d=l_d,
                           ke1_matches=ke1_ok, ke2_matches=ke2_ok,
                           lambda_min_ks2=lam, threshold=thr, margin=margin,
                           passed=passed, mu_warning=warn)
