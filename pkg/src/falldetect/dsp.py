"""Low-pass Butterworth design as cascaded biquads, and its application."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as _signal

from .errors import FilterDesignError, SignalError


@dataclass(frozen=True)
class FilterSpec:
    order: int = 4
    cutoff_hz: float = 5.0
    sample_rate_hz: float = 200.0

    def __post_init__(self):
        if self.order < 2 or self.order % 2:
            raise FilterDesignError(f"order must be even and >= 2, got {self.order}")
        if not self.sample_rate_hz > 0:
            raise FilterDesignError(f"sample rate must be positive, got {self.sample_rate_hz}")
        if not 0 < self.cutoff_hz < self.sample_rate_hz / 2:
            raise FilterDesignError(
                f"cutoff {self.cutoff_hz} Hz must lie in (0, Nyquist={self.sample_rate_hz / 2} Hz)"
            )

    @property
    def nyquist_hz(self) -> float:
        return self.sample_rate_hz / 2


@dataclass(frozen=True)
class BiquadCascade:
    """Second-order sections ``(b0, b1, b2, a1, a2)`` with ``a0 = 1``.

    Each section computes ``y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]``.
    """

    sections: tuple[tuple[float, float, float, float, float], ...]

    def __post_init__(self):
        if not self.sections:
            raise FilterDesignError("a cascade needs at least one section")
        for sec in self.sections:
            if len(sec) != 5:
                raise FilterDesignError(f"section {sec!r} must have 5 coefficients")

    @classmethod
    def identity(cls) -> "BiquadCascade":
        return cls(((1.0, 0.0, 0.0, 0.0, 0.0),))

    def as_sos(self) -> np.ndarray:
        """scipy-style ``(n_sections, 6)`` array."""
        return np.array([[b0, b1, b2, 1.0, a1, a2] for b0, b1, b2, a1, a2 in self.sections])

    def poles(self) -> np.ndarray:
        return np.concatenate([np.roots([1.0, a1, a2]) for _, _, _, a1, a2 in self.sections])

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.poles()) < 1.0))


def design_butterworth(spec: FilterSpec = FilterSpec()) -> BiquadCascade:
    """Bilinear-transform Butterworth low-pass with prewarped cutoff.

    The analog prototype factors into ``order/2`` conjugate-pole pairs
    ``s^2 + 2 sin(theta_k) s + 1``; each maps to one biquad with a double zero
    at ``z = -1``.  Each section's numerator is rescaled so its DC gain is
    exactly one.
    """
    k = math.tan(math.pi * spec.cutoff_hz / spec.sample_rate_hz)
    k2 = k * k
    n_pairs = spec.order // 2
    sections = []
    for i in range(n_pairs):
        r = math.sin(math.pi * (2 * i + 1) / (2 * spec.order))
        norm = k2 + 2.0 * k * r + 1.0
        a1 = -2.0 * (1.0 - k2) / norm
        a2 = (k2 - 2.0 * k * r + 1.0) / norm
        g = (1.0 + a1 + a2) / 4.0
        sections.append((g, 2.0 * g, g, a1, a2))
    cascade = BiquadCascade(tuple(sections))
    if not cascade.is_stable():
        raise FilterDesignError(f"design for {spec} produced an unstable cascade")
    return cascade


def butterworth_magnitude(freq_hz, spec: FilterSpec = FilterSpec()):
    """Closed-form magnitude of the bilinear Butterworth design at ``freq_hz``."""
    ratio = np.tan(np.pi * np.asarray(freq_hz, dtype=float) / spec.sample_rate_hz) / math.tan(
        math.pi * spec.cutoff_hz / spec.sample_rate_hz
    )
    return 1.0 / np.sqrt(1.0 + ratio ** (2 * spec.order))


def frequency_response(cascade: BiquadCascade, freq_hz: float, sample_rate_hz: float) -> float:
    """|H(e^{jw})| of the cascade at ``freq_hz``."""
    if not 0.0 <= freq_hz <= sample_rate_hz / 2:
        raise SignalError(f"frequency {freq_hz} Hz outside [0, {sample_rate_hz / 2}] Hz")
    z1 = np.exp(-2j * np.pi * freq_hz / sample_rate_hz)
    h = 1.0 + 0j
    for b0, b1, b2, a1, a2 in cascade.sections:
        h *= (b0 + b1 * z1 + b2 * z1 * z1) / (1.0 + a1 * z1 + a2 * z1 * z1)
    return float(abs(h))


def _check_finite(x: np.ndarray) -> None:
    bad = ~np.isfinite(x)
    if bad.any():
        idx = int(np.argmax(bad))
        raise SignalError(f"non-finite sample {x[idx]!r} at index {idx}")


def filter_signal(series, cascade: BiquadCascade, zero_phase: bool = False) -> np.ndarray:
    """Run the cascade over ``series`` from a zero initial state.

    With ``zero_phase`` the causal pass is followed by a time-reversed pass,
    squaring the magnitude response and cancelling phase delay.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise SignalError(f"expected a 1-D series, got shape {x.shape}")
    _check_finite(x)
    sos = cascade.as_sos()
    y = _signal.sosfilt(sos, x)
    if zero_phase:
        y = _signal.sosfilt(sos, y[::-1])[::-1].copy()
    return y


def filter_channels(channels: np.ndarray, cascade: BiquadCascade, zero_phase: bool = False) -> np.ndarray:
    """Filter every row of a ``(n_channels, n)`` array independently."""
    x = np.asarray(channels, dtype=np.float64)
    for row in x:
        _check_finite(row)
    sos = cascade.as_sos()
    y = _signal.sosfilt(sos, x, axis=-1)
    if zero_phase:
        y = _signal.sosfilt(sos, y[:, ::-1], axis=-1)[:, ::-1].copy()
    return y
