"""Wavepacket overlap model for the delay-line scans.

The translation stage delays the two left-side paths (ell_A, ell_B) relative
to the right-side ones.  A delayed photon keeps a two-component temporal
state |tau> = O|tau0> + sqrt(1-O^2)|tau_perp>, where O is the mode overlap
at the current delay.  The default envelope is Gaussian,

    O(dx) = o0 * exp(-dx^2 / (2 sigma^2)),

with sigma the coherence length set by the spectral filters and o0 <= 1 an
overall mode-matching amplitude.  A Gaussian-times-sinc envelope (rectangular
filter edge) is available as an alternative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

GAUSSIAN = "gaussian"
GAUSSIAN_SINC = "gaussian_sinc"


@dataclass(frozen=True)
class WavepacketConfig:
    """Delays are in micrometers, keyed by spatial side (ell vs r)."""

    delay_ell_um: float = 0.0
    delay_r_um: float = 0.0
    coherence_sigma_um: float = 18.892
    overlap_at_zero: float = 1.0
    envelope: str = GAUSSIAN
    sinc_scale_um: float = 0.0  # used by the gaussian_sinc envelope only

    def __post_init__(self):
        if self.coherence_sigma_um <= 0:
            raise ValueError("coherence_sigma_um must be positive")
        if not 0.0 < self.overlap_at_zero <= 1.0:
            raise ValueError("overlap_at_zero must be in (0, 1]")
        if self.envelope not in (GAUSSIAN, GAUSSIAN_SINC):
            raise ValueError(f"unknown envelope {self.envelope!r}")
        if self.envelope == GAUSSIAN_SINC and self.sinc_scale_um <= 0:
            raise ValueError("gaussian_sinc envelope needs sinc_scale_um > 0")

    @property
    def delta_x_um(self) -> float:
        return self.delay_ell_um - self.delay_r_um

    def with_delay(self, delta_x_um: float) -> "WavepacketConfig":
        return WavepacketConfig(delta_x_um, 0.0, self.coherence_sigma_um,
                                self.overlap_at_zero, self.envelope, self.sinc_scale_um)


def temporal_overlap(cfg: WavepacketConfig) -> float:
    """Overlap amplitude O(delta_x) in [0, 1]."""
    dx = cfg.delta_x_um
    o = cfg.overlap_at_zero * math.exp(-dx ** 2 / (2.0 * cfg.coherence_sigma_um ** 2))
    if cfg.envelope == GAUSSIAN_SINC:
        x = dx / cfg.sinc_scale_um
        o *= abs(math.sin(math.pi * x) / (math.pi * x)) if x != 0 else 1.0
    return min(max(o, 0.0), 1.0)


def coherence_sigma_from_filter(center_nm: float = 710.0, fwhm_nm: float = 10.0) -> float:
    """Coherence length (um) of a Gaussian spectral filter.

    For a Gaussian intensity spectrum of FWHM `fwhm_nm` centered at
    `center_nm`, the overlap of two copies delayed by dx is
    exp(-sigma_k^2 dx^2 / 2) with sigma_k the wavenumber spread; the returned
    sigma is 1/sigma_k, so O(dx) = exp(-dx^2 / (2 sigma^2)).
    """
    sigma_lambda = fwhm_nm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    sigma_k_per_nm = 2.0 * math.pi * sigma_lambda / center_nm ** 2
    return 1e-3 / sigma_k_per_nm  # nm -> um
