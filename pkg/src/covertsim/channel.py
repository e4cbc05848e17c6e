"""Time-varying frequency-selective channel synthesis.

Taps are drawn once per slot from a correlated complex Gaussian, then
phase-rotated by the Doppler term for the slot's start time. Propagation
is zero-prefix linear convolution truncated to the slot length (the l-th
tap delays the signal by l samples).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import (
    CorrelationMatrix,
    DomainError,
    RngStream,
    sample_awgn,
    sample_correlated_cgn,
)


@dataclass(frozen=True)
class ChannelConfig:
    """Per-receiver channel parameters (defaults follow the simulator presets)."""

    n_taps: int = 4
    rho: float = 0.5
    doppler_hz: float = 10.0
    symbol_duration: float = 1e-6
    noise_variance: float = 1.0

    def __post_init__(self):
        if self.n_taps < 1:
            raise DomainError(f"n_taps must be >= 1, got {self.n_taps}")
        if not (0.0 <= self.rho < 1.0):
            raise DomainError(f"rho must be in [0,1), got {self.rho}")
        if self.doppler_hz < 0:
            raise DomainError(f"doppler_hz must be >= 0, got {self.doppler_hz}")
        if self.symbol_duration <= 0:
            raise DomainError(f"symbol_duration must be > 0, got {self.symbol_duration}")
        if self.noise_variance <= 0:
            raise DomainError(f"noise_variance must be > 0, got {self.noise_variance}")

    def correlation(self) -> CorrelationMatrix:
        return CorrelationMatrix(self.n_taps, self.rho)


@dataclass
class TapSet:
    """Base tap gains for one slot, Doppler-rotated on demand."""

    base_taps: np.ndarray
    doppler_hz: float = 0.0

    def tap_at(self, t: float) -> np.ndarray:
        return doppler_rotate(self.base_taps, t, self.doppler_hz)


@dataclass
class ReceivedSlot:
    """One received slot with its hypothesis label.

    effective_x (the noise-free received signal) is kept only under H1;
    it is what a genie warden would correlate against.
    """

    y: np.ndarray
    hypothesis: str
    effective_x: np.ndarray | None = field(default=None)


def sample_taps(cfg: ChannelConfig, rng: RngStream | np.random.Generator,
                count: int | None = None) -> TapSet | np.ndarray:
    """Draw correlated unit-mean-power tap gains.

    With count=None returns a TapSet for a single slot; with an integer
    count returns a (count, L) array of base taps for batched use.
    """
    draws = 1 if count is None else count
    taps = sample_correlated_cgn(cfg.correlation(), rng, count=draws)
    if count is None:
        return TapSet(taps[0], cfg.doppler_hz)
    return taps


def doppler_rotate(base_taps: np.ndarray, t: float, doppler_hz: float) -> np.ndarray:
    """Rotate every tap by exp(j 2 pi f_d t); magnitudes are untouched."""
    if t < 0:
        raise DomainError(f"time must be >= 0, got {t}")
    return base_taps * np.exp(2j * np.pi * doppler_hz * t)


def propagate(s: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Apply the multipath channel: out[k] = sum_l h_l s[k-l], zero-prefixed.

    Supports batched input: s (B, N) with taps (B, L) or (L,).
    """
    s = np.atleast_2d(s)
    taps = np.atleast_2d(taps)
    batch, n = s.shape
    n_taps = taps.shape[1]
    if n < n_taps:
        raise DomainError(f"signal length {n} shorter than tap count {n_taps}")
    if taps.shape[0] == 1 and batch > 1:
        taps = np.broadcast_to(taps, (batch, n_taps))
    out = np.zeros_like(s)
    for l in range(n_taps):
        out[:, l:] += taps[:, l:l + 1] * s[:, :n - l]
    return out[0] if batch == 1 and out.shape[0] == 1 else out


def propagate_adjoint(grad_y: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`propagate` in s, for reverse-mode gradients.

    grad_s[k] = sum_l conj(h_l) grad_y[k+l]; treating complex vectors as
    stacked real pairs this is the exact transpose of the real-linear map.
    """
    grad_y = np.atleast_2d(grad_y)
    taps = np.atleast_2d(taps)
    batch, n = grad_y.shape
    n_taps = taps.shape[1]
    if taps.shape[0] == 1 and batch > 1:
        taps = np.broadcast_to(taps, (batch, n_taps))
    out = np.zeros_like(grad_y)
    for l in range(n_taps):
        out[:, :n - l] += np.conj(taps[:, l:l + 1]) * grad_y[:, l:]
    return out


def receive(s: np.ndarray | None, taps: TapSet, t: float, cfg: ChannelConfig,
            rng: RngStream | np.random.Generator, n: int | None = None) -> ReceivedSlot:
    """Produce one received slot under H1 (s given) or H0 (s is None)."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    if s is None:
        if n is None:
            raise DomainError("slot length n is required for an H0 (noise-only) slot")
        noise = sample_awgn(n, cfg.noise_variance, gen)
        return ReceivedSlot(y=noise, hypothesis="H0")
    s = np.asarray(s)
    x = propagate(s, taps.tap_at(t))
    noise = sample_awgn(len(s), cfg.noise_variance, gen)
    return ReceivedSlot(y=x + noise, hypothesis="H1", effective_x=x)
