"""Online fractional differintegration of sampled signals.

Grunwald-Letnikov weights with short-memory truncation; negative orders
realize fractional integrals. Derivative-order operators subtract the
signal value at the memory origin so that they agree with the Caputo
operator on the signals used here (zero output on constants).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "gamma",
    "gl_coefficients",
    "FracOp",
    "SampledSignal",
    "differintegrate",
]

# Lanczos approximation, g = 7, 9 coefficients (double precision accurate).
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(z: float) -> float:
    """Gamma function via the Lanczos series, reflection below 1/2."""
    z = float(z)
    if z <= 0.0 and z == math.floor(z):
        raise ValueError(f"gamma pole at non-positive integer z={z:g}")
    if z < 0.5:
        # Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return math.pi / (math.sin(math.pi * z) * gamma(1.0 - z))
    z -= 1.0
    acc = _LANCZOS_C[0]
    for i, c in enumerate(_LANCZOS_C[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc


def gl_coefficients(order: float, n: int) -> np.ndarray:
    """First n GL binomial weights w_k = w_{k-1} (1 - (order+1)/k), w_0 = 1."""
    if n < 1:
        raise ValueError("need n >= 1 coefficients")
    w = np.empty(n)
    w[0] = 1.0
    if n > 1:
        k = np.arange(1, n, dtype=float)
        w[1:] = np.cumprod(1.0 - (order + 1.0) / k)
    return w


@dataclass
class SampledSignal:
    """Uniformly sampled vector signal."""

    values: np.ndarray  # (N, dim)
    step: float
    start_time: float = 0.0

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.values.shape[0] == 1 and self.values.shape[1] > 1:
            # accept a flat sequence as a scalar signal
            self.values = self.values.T
        if self.step <= 0.0:
            raise ValueError("step must be positive")

    @property
    def times(self) -> np.ndarray:
        return self.start_time + self.step * np.arange(self.values.shape[0])


class FracOp:
    """One online fractional differintegrator channel.

    Keeps a most-recent-first ring buffer of samples and returns
    h**(-order) * sum_k w_k x[t - k h] truncated at `window` samples.
    `subtract_origin` anchors the memory to the first post-reset sample
    (Caputo behaviour for derivative orders); pass False for the plain
    GL/Riemann-Liouville convolution, which is what inverse-pair
    compositions require.
    """

    def __init__(self, order: float, step: float, window: int = 10_000,
                 subtract_origin: bool | None = None):
        if step <= 0.0:
            raise ValueError("step must be positive")
        if window < 1:
            raise ValueError("window must be >= 1")
        self.order = float(order)
        self.step = float(step)
        self.window = int(window)
        if subtract_origin is None:
            subtract_origin = self.order > 0.0
        self.subtract_origin = bool(subtract_origin) and self.order > 0.0
        self.coeffs = gl_coefficients(self.order, self.window)
        self._scale = self.step ** (-self.order)
        self._buf: np.ndarray | None = None  # (window, dim)
        self._head = 0
        self._count = 0
        self._origin: np.ndarray | None = None

    @property
    def history_length(self) -> int:
        return self._count

    def reset(self, new_baseline=None) -> None:
        """Clear memory; subsequent samples differintegrate from here."""
        self._head = 0
        self._count = 0
        if new_baseline is None:
            self._origin = None
        else:
            self._origin = np.atleast_1d(np.asarray(new_baseline, dtype=float)).copy()

    def push_and_differintegrate(self, sample) -> np.ndarray:
        """Append one sample, return the operator output at this instant."""
        x = np.atleast_1d(np.asarray(sample, dtype=float))
        if self._buf is None or (self._count == 0 and x.shape[0] != self._buf.shape[1]):
            self._buf = np.empty((self.window, x.shape[0]))
        if x.shape[0] != self._buf.shape[1]:
            raise ValueError(
                f"sample dimension {x.shape[0]} does not match history dimension {self._buf.shape[1]}")
        if self.subtract_origin:
            if self._origin is None:
                self._origin = x.copy()
            elif self._origin.shape[0] != x.shape[0]:
                raise ValueError("baseline dimension mismatch")
            x = x - self._origin
        self._head = (self._head - 1) % self.window
        self._buf[self._head] = x
        if self._count < self.window:
            self._count += 1
        n = self._count
        first = min(self.window - self._head, n)
        out = self.coeffs[:first] @ self._buf[self._head:self._head + first]
        if first < n:
            out += self.coeffs[first:n] @ self._buf[:n - first]
        return self._scale * out

    # short alias used throughout the controller code
    push = push_and_differintegrate


def differintegrate(signal: SampledSignal, order: float, window: int = 10_000,
                    step: float | None = None,
                    subtract_origin: bool | None = None) -> SampledSignal:
    """Apply one GL operator to a whole sampled signal.

    `step`, when given, asserts the operator rate; mixed-rate input is
    refused rather than resampled.
    """
    if step is not None and abs(step - signal.step) > 1e-15:
        raise ValueError(f"operator step {step:g} != signal step {signal.step:g}")
    op = FracOp(order, signal.step, window=window, subtract_origin=subtract_origin)
    out = np.empty_like(signal.values)
    for i, row in enumerate(signal.values):
        out[i] = op.push(row)
    return SampledSignal(out, signal.step, signal.start_time)
