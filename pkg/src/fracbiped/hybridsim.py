"""Fixed-step RK4 integration of the closed loop with impact events.

The control is held zero-order over each step. Guards are checked at
step boundaries; an armed sign change is refined by bisection, the
partial step re-integrated to the event time, the reset map applied,
all fractional memories cleared, and integration resumes on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .phmodel.base import PHState, RobotModel

__all__ = [
    "IntegratorConfig",
    "HybridTrace",
    "IntegrationError",
    "EventError",
    "step_rk4",
    "locate_event",
    "simulate",
]


class IntegrationError(RuntimeError):
    """Non-finite or runaway state during integration."""


class EventError(RuntimeError):
    """Bisection bracket does not contain an armed sign change."""


@dataclass
class IntegratorConfig:
    step: float = 1e-3
    horizon: float = 10.0
    event_tolerance: float = 1e-9
    max_impacts: int = 1000
    chatter_guard_steps: int = 10

    def __post_init__(self):
        if self.step <= 0.0:
            raise ValueError("step must be positive")
        if not 0.0 < self.event_tolerance < self.step:
            raise ValueError("event_tolerance must be in (0, step)")


def step_rk4(deriv, t: float, y: np.ndarray, h: float) -> np.ndarray:
    """Classical fourth-order Runge-Kutta update."""
    k1 = deriv(t, y)
    if not np.all(np.isfinite(k1)):
        raise IntegrationError(f"non-finite derivative at t={t:.6f}")
    k2 = deriv(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = deriv(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = deriv(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def locate_event(deriv, guard_value, t0: float, y0: np.ndarray, t1: float,
                 tol: float = 1e-9) -> tuple[float, np.ndarray]:
    """Bisect the guard zero crossing inside [t0, t1].

    `guard_value(t, y)` must change sign between the bracket ends; the
    candidate states are reached by a single partial RK4 step from
    (t0, y0), which matches the integration accuracy at step scale.
    """
    g0 = guard_value(t0, y0)
    y1 = step_rk4(deriv, t0, y0, t1 - t0)
    g1 = guard_value(t1, y1)
    if g0 == 0.0:
        return t0, y0.copy()
    if np.sign(g0) == np.sign(g1):
        raise EventError(f"no sign change in [{t0:.6f}, {t1:.6f}] (g0={g0:g}, g1={g1:g})")
    lo, hi = t0, t1
    y_hi = y1
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        y_mid = step_rk4(deriv, t0, y0, mid - t0)
        g_mid = guard_value(mid, y_mid)
        if g_mid == 0.0 or np.sign(g_mid) != np.sign(g0):
            hi, y_hi = mid, y_mid
        else:
            lo = mid
    return hi, y_hi


_BASE_COLUMNS = ("t", "q", "p", "qdot", "q_d", "qd_d", "e_x", "v", "s", "tau",
                 "d_true", "d_hat", "H", "V_s")


@dataclass
class HybridTrace:
    """Dict-of-arrays record of one hybrid run."""

    data: dict = field(default_factory=dict)
    impact_times: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.data[key]

    def __contains__(self, key):
        return key in self.data

    @property
    def t(self):
        return self.data["t"]

    def window_mask(self, t0: float, t1: float) -> np.ndarray:
        t = self.data["t"]
        return (t >= t0) & (t <= t1)

    def exclude_after_impacts(self, width: float) -> np.ndarray:
        """Mask that drops `width` seconds after every impact."""
        t = self.data["t"]
        keep = np.ones(t.shape, dtype=bool)
        for tk in self.impact_times:
            keep &= ~((t >= tk) & (t < tk + width))
        return keep


def simulate(model: RobotModel, controller, estimator, disturbance, gait,
             config: IntegratorConfig, x0: PHState) -> HybridTrace:
    """Run the closed loop; returns the dense trace and impact times."""
    h = config.step
    n = model.n
    m = model.m
    steps = int(round(config.horizon / h))
    cols = {
        "t": np.empty(steps + 1),
        "q": np.empty((steps + 1, n)),
        "p": np.empty((steps + 1, n)),
        "qdot": np.empty((steps + 1, n)),
        "q_d": np.empty((steps + 1, n)),
        "qd_d": np.empty((steps + 1, n)),
        "e_x": np.empty((steps + 1, m)),
        "v": np.empty((steps + 1, m)),
        "s": np.empty((steps + 1, m)),
        "tau": np.empty((steps + 1, m)),
        "d_true": np.empty((steps + 1, n)),
        "d_hat": np.empty((steps + 1, m)),
        "H": np.empty(steps + 1),
        "V_s": np.empty(steps + 1),
        "hip_x": np.empty(steps + 1),
        "hip_y": np.empty(steps + 1),
        "swing_x": np.empty(steps + 1),
        "swing_y": np.empty(steps + 1),
    }
    impact_times: list[float] = []
    state = x0.copy()
    anchor = state.t
    stance_shift = np.zeros(2)
    chatter = 0
    beta = controller.inner.beta if controller is not None else 1.75

    def make_deriv(tau_zoh):
        def deriv(t, y):
            st = PHState(y[:n], y[n:], t)
            d = disturbance(t, st) if disturbance is not None else None
            return model.flow(st, tau_zoh, d)
        return deriv

    def guard_fn(t, y):
        value, _ = model.guard(PHState(y[:n], y[n:], t))
        return value

    i = 0
    while True:
        t = state.t
        # controller sample (zero-order hold over the step)
        if controller is not None:
            ref = gait.reference(t - anchor)
            rec = controller.begin_step(state, ref)
            d_hat = estimator.estimate(rec) if estimator is not None else None
            tau = controller.finish_step(d_hat)
            if estimator is not None:
                estimator.advance(rec, tau)
        else:
            ref = gait.reference(t - anchor) if gait is not None else None
            rec = None
            d_hat = None
            tau = np.zeros(m)

        # record the grid point
        qdot = model.velocity(state.q, state.p)
        d_now = disturbance(t, state) if disturbance is not None else np.zeros(n)
        cols["t"][i] = t
        cols["q"][i] = state.q
        cols["p"][i] = state.p
        cols["qdot"][i] = qdot
        cols["q_d"][i] = ref.q_d if ref is not None else np.zeros(n)
        cols["qd_d"][i] = ref.qd_d if ref is not None else np.zeros(n)
        cols["e_x"][i] = rec.e_x if rec is not None else np.zeros(m)
        cols["v"][i] = rec.v if rec is not None else np.zeros(m)
        cols["s"][i] = rec.s if rec is not None else np.zeros(m)
        cols["tau"][i] = tau
        cols["d_true"][i] = d_now if d_now is not None else np.zeros(n)
        cols["d_hat"][i] = d_hat if d_hat is not None else np.zeros(m)
        cols["H"][i] = model.hamiltonian(state)
        s_now = rec.s if rec is not None else np.zeros(m)
        cols["V_s"][i] = float(s_now @ s_now) ** beta
        hip = model.hip_position(state.q) + stance_shift
        swing = model.swing_foot_position(state.q) + stance_shift
        cols["hip_x"][i], cols["hip_y"][i] = hip
        cols["swing_x"][i], cols["swing_y"][i] = swing

        if i >= steps:
            break

        # integrate one step with held control
        deriv = make_deriv(tau)
        t_next = x0.t + (i + 1) * h
        y = np.concatenate([state.q, state.p])
        y_next = step_rk4(deriv, t, y, t_next - t)
        if not np.all(np.isfinite(y_next)) or np.max(np.abs(y_next)) > 1e6:
            raise IntegrationError(f"state diverged at t={t_next:.6f}")
        next_state = PHState(y_next[:n], y_next[n:], t_next)

        if chatter > 0:
            chatter -= 1
        else:
            g0, armed0 = model.guard(state)
            g1, armed1 = model.guard(next_state)
            fire = armed1 and (g1 <= 0.0) and (g0 > 0.0)
            # catch-up: crossing happened earlier while unarmed
            fire_late = armed1 and (g1 <= 0.0) and (g0 <= 0.0) and not armed0
            if fire:
                tk, yk = locate_event(deriv, guard_fn, t, y, t_next, config.event_tolerance)
                pre = PHState(yk[:n], yk[n:], tk)
                stance_shift = stance_shift + model.swing_foot_position(pre.q)
                post = model.impact(pre)
                impact_times.append(tk)
                if controller is not None:
                    controller.reset()
                if estimator is not None:
                    estimator.reset()
                if gait is not None and getattr(gait.config, "phase_reset_at_impact", True):
                    anchor = tk
                chatter = config.chatter_guard_steps
                if len(impact_times) >= config.max_impacts:
                    state = post
                    state.t = tk
                    # truncate the trace at the current row
                    for key in cols:
                        cols[key] = cols[key][:i + 1]
                    trace = HybridTrace(cols, impact_times,
                                        {"terminated": "max_impacts", "horizon": config.horizon})
                    return trace
                # finish the remainder of the step with a fresh control sample
                if controller is not None:
                    ref_k = gait.reference(tk - anchor)
                    rec_k = controller.begin_step(post, ref_k)
                    d_hat_k = estimator.estimate(rec_k) if estimator is not None else None
                    tau_k = controller.finish_step(d_hat_k)
                    if estimator is not None:
                        estimator.advance(rec_k, tau_k)
                else:
                    tau_k = np.zeros(m)
                deriv_k = make_deriv(tau_k)
                y_post = np.concatenate([post.q, post.p])
                y_next = step_rk4(deriv_k, tk, y_post, t_next - tk)
                next_state = PHState(y_next[:n], y_next[n:], t_next)
            elif fire_late:
                # arm boundary reached below the surface; treat arming instant as the event
                impact_times.append(t_next)
                stance_shift = stance_shift + model.swing_foot_position(next_state.q)
                next_state = model.impact(next_state)
                next_state.t = t_next
                if controller is not None:
                    controller.reset()
                if estimator is not None:
                    estimator.reset()
                if gait is not None and getattr(gait.config, "phase_reset_at_impact", True):
                    anchor = t_next
                chatter = config.chatter_guard_steps

        state = next_state
        i += 1

    return HybridTrace(cols, impact_times, {"terminated": "horizon", "horizon": config.horizon})
