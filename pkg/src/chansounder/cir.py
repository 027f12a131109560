"""Frequency sweep to denoised power-delay profile.

Pipeline: Hann window -> inverse DFT (1/N scaling) -> noise fit on late
delay bins -> power threshold at 2*(4*sigma)^2 -> tail removal -> first-tap
detection (earliest tap within 10 dB of the max, no more than 5 ns before
it) -> delays re-referenced to the first tap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .campaign import FrequencySweep

#: IDFT convention used throughout: tap_k = (1/N) * sum_m sample_m * exp(+2j*pi*m*k/N).
#: Absolute tap powers therefore relate to mean sweep power via Parseval:
#: sum |tap|^2 = mean |sample|^2.
IDFT_SCALING = "1/N"

#: How the first delay tap is picked, echoed into run metadata.
FIRST_TAP_RULE = "earliest tap within 10 dB of max power, at most 5 ns before the max tap"


class NoDetectableSignal(RuntimeError):
    """Every delay bin fell below the noise threshold."""


@dataclass(frozen=True)
class DenoiseConfig:
    """Knobs of the denoising stage. Defaults follow the measurement campaign
    processing: 4-sigma threshold, 10 dB first-tap window, 5 ns early-tap
    window, noise fitted to the last 10% of the delay span."""

    noise_range_fraction: float = 0.1
    sigma_multiplier: float = 4.0
    first_tap_db_window: float = 10.0
    first_tap_time_window_s: float = 5e-9
    max_delay_cut: int | None = None  # bin index; None = start of the noise range

    def __post_init__(self):
        if not 0 < self.noise_range_fraction <= 1:
            raise ValueError("noise_range_fraction must be in (0, 1]")
        for name in ("sigma_multiplier", "first_tap_db_window", "first_tap_time_window_s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.max_delay_cut is not None and self.max_delay_cut <= 0:
            raise ValueError("max_delay_cut must be > 0")


@dataclass(frozen=True, eq=False)
class ImpulseResponse:
    """Complex delay taps; bin spacing 1/(n_points * df) of the source sweep."""

    taps: np.ndarray
    delay_bin_s: float

    def __post_init__(self):
        object.__setattr__(self, "taps", np.asarray(self.taps, dtype=complex))
        if self.delay_bin_s <= 0:
            raise ValueError("delay_bin_s must be > 0")

    @property
    def n_bins(self) -> int:
        return len(self.taps)

    def delays_s(self) -> np.ndarray:
        return np.arange(self.n_bins) * self.delay_bin_s


@dataclass(frozen=True)
class NoiseEstimate:
    """Zero-mean normal fit to the real/imag tap components of the late-delay
    noise range. threshold_power = 2*(sigma_multiplier*sigma_component)^2,
    i.e. both components at the amplitude limit."""

    sigma_component: float
    noise_range: tuple[int, int]  # (first_bin, last_bin), inclusive
    threshold_power: float
    noise_free: bool = False


@dataclass(frozen=True, eq=False)
class PowerDelayProfile:
    """Surviving delay taps, re-referenced so the first tap sits at delay 0."""

    delays_s: np.ndarray
    powers: np.ndarray
    first_tap_abs_delay_s: float
    total_power: float

    def __post_init__(self):
        object.__setattr__(self, "delays_s", np.asarray(self.delays_s, dtype=float))
        object.__setattr__(self, "powers", np.asarray(self.powers, dtype=float))
        if self.delays_s.shape != self.powers.shape:
            raise ValueError("delays_s and powers must have equal length")
        if len(self.delays_s) == 0:
            raise ValueError("empty power-delay profile")
        if self.delays_s[0] != 0.0:
            raise ValueError("delays_s must be re-referenced to the first tap")

    @property
    def n_taps(self) -> int:
        return len(self.powers)


def hann_window(n: int) -> np.ndarray:
    """Symmetric Hann taper w_k = 0.5*(1 - cos(2*pi*k/(n-1)))."""
    return np.hanning(n)


def hann_power_ratio(n: int) -> float:
    """Mean power of the Hann taper, sum(w^2)/n (~0.375 for large n)."""
    w = hann_window(n)
    return float(np.sum(w * w) / n)


def apply_window(sweep: FrequencySweep) -> FrequencySweep:
    """Return a new sweep with the Hann taper applied; input unmodified."""
    w = hann_window(sweep.config.n_points)
    return FrequencySweep(sweep.config, sweep.samples * w, link_id=sweep.link_id)


def to_impulse_response(sweep: FrequencySweep) -> ImpulseResponse:
    """Inverse DFT of the sweep samples (1/N scaling, see IDFT_SCALING)."""
    cfg = sweep.config
    taps = np.fft.ifft(sweep.samples)
    return ImpulseResponse(taps, delay_bin_s=1.0 / (cfg.n_points * cfg.df_hz))


def estimate_noise(ir: ImpulseResponse, cfg: DenoiseConfig = DenoiseConfig()) -> NoiseEstimate:
    """Fit the per-component noise std to the late delay bins.

    Means are fixed at zero (noise is zero-mean by physics; estimating them
    from a short tail only adds variance). An all-zero tail is flagged as a
    synthetic noise-free input with threshold 0.
    """
    n_noise = int(round(cfg.noise_range_fraction * ir.n_bins))
    if n_noise < 30:
        raise ValueError(
            f"noise range has {n_noise} bins "
            f"({cfg.noise_range_fraction:g} of {ir.n_bins}); need at least 30"
        )
    first = ir.n_bins - n_noise
    tail = ir.taps[first:]
    sigma = float(np.sqrt((np.sum(tail.real**2) + np.sum(tail.imag**2)) / (2 * n_noise)))
    if sigma == 0.0:
        return NoiseEstimate(0.0, (first, ir.n_bins - 1), 0.0, noise_free=True)
    threshold = 2.0 * (cfg.sigma_multiplier * sigma) ** 2
    return NoiseEstimate(sigma, (first, ir.n_bins - 1), threshold)


def denoise(
    ir: ImpulseResponse,
    noise: NoiseEstimate,
    cfg: DenoiseConfig = DenoiseConfig(),
) -> PowerDelayProfile:
    """Extract the power-delay profile from an impulse response.

    Steps: drop bins at/after the tail cut (delays that long are not
    physical here, and the cut also removes the rising tail the cyclic
    transform produces), drop bins below the noise threshold, pick the
    first tap, drop everything before it, re-reference delays to it.
    """
    power = np.abs(ir.taps) ** 2
    cut = cfg.max_delay_cut if cfg.max_delay_cut is not None else noise.noise_range[0]
    idx = np.flatnonzero(
        (np.arange(ir.n_bins) < cut) & (power >= noise.threshold_power) & (power > 0.0)
    )
    if len(idx) == 0:
        raise NoDetectableSignal("no delay bin above the noise threshold")

    pw = power[idx]
    bin_max = idx[int(np.argmax(pw))]
    in_window = idx[pw >= pw.max() * 10.0 ** (-cfg.first_tap_db_window / 10.0)]
    max_lead_bins = cfg.first_tap_time_window_s / ir.delay_bin_s
    accepted = in_window[(in_window >= bin_max - max_lead_bins) & (in_window <= bin_max)]
    first = int(accepted.min())

    keep = idx[idx >= first]
    delays = (keep - first) * ir.delay_bin_s
    powers = power[keep]
    return PowerDelayProfile(
        delays_s=delays,
        powers=powers,
        first_tap_abs_delay_s=first * ir.delay_bin_s,
        total_power=float(np.sum(powers)),
    )
