"""Calibrated noise presets reproducing the published figures of merit.

The experiments were separate runs with re-compensation in between, so each
one carries its own calibration (a single noise config cannot reproduce all
quoted numbers at once; e.g. the witness stabilizers imply more path
decoherence than the Grover success rate tolerates).

Calibration summary (derivations in comments below):
  hom       V_raw 0.976 / 0.982, net 0.985 / 0.991
  hescan    V_dip 0.860, V_peak 0.93
  pathscan  V_dip 0.915, V_peak 0.892, width 13.36 um ~ 13.2 um
  cluster   F(Phi-) 0.910, F(Phi+) 0.845, C 0.895 / 0.895; Table-1 bands
  si_source F = 0.90 polarization tomography of the bare source
  grover    success 0.962 (postselect and feed-forward)
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .modes import Arm
from .source import EfficiencyTable, SourceConfig
from .wavepacket import WavepacketConfig, coherence_sigma_from_filter

#: Coherence length from the 10 nm interference filters at 710 nm.
SIGMA_UM = coherence_sigma_from_filter(710.0, 10.0)

#: Residual mode-matching amplitude at zero delay for the cross-arm scans.
OVERLAP_ZERO = 0.993

DEFAULT_BRIGHTNESS = 1700.0  # detected-pair scale; absolute value unpublished


def _wavepacket(overlap=OVERLAP_ZERO) -> WavepacketConfig:
    return WavepacketConfig(coherence_sigma_um=SIGMA_UM, overlap_at_zero=overlap)


def hom_source(arm: Arm) -> SourceConfig:
    """Per-BS HOM calibration.

    Net visibility is the zero-delay overlap squared (o0^2 = V_net); the raw
    visibility is V_net / (1 + r) with r = 2*acc/(brightness*eta) the
    accidental-to-baseline ratio, inverted here for the quoted raw values.
    """
    eff = EfficiencyTable()
    if arm == Arm.A:
        v_net, v_raw = 0.985, 0.976
        eta = eff.ell_a * eff.r_a
    else:
        v_net, v_raw = 0.991, 0.982
        eta = eff.ell_b * eff.r_b
    acc = (v_net / v_raw - 1.0) * DEFAULT_BRIGHTNESS * eta / 2.0
    return SourceConfig(
        wavepacket=_wavepacket(overlap=math.sqrt(v_net)),
        accidental_rate_hz=acc, brightness_pairs_hz=DEFAULT_BRIGHTNESS)


def hescan_source() -> SourceConfig:
    return SourceConfig(wavepacket=_wavepacket(), brightness_pairs_hz=DEFAULT_BRIGHTNESS)


#: Per-classification path coherence for the hyperentangled scan:
#: V = v_path * o0^2, inverted for V_dip = 0.860 and V_peak = 0.93.
HESCAN_V_PATH_DIP = 0.860 / OVERLAP_ZERO ** 2
HESCAN_V_PATH_PEAK = 0.93 / OVERLAP_ZERO ** 2

#: Same for the SI path-only scan: V_dip = 0.915 (phi = 0), V_peak = 0.892.
PATHSCAN_V_PATH_DIP = 0.915 / OVERLAP_ZERO ** 2
PATHSCAN_V_PATH_PEAK = 0.892 / OVERLAP_ZERO ** 2


def pathscan_source() -> SourceConfig:
    return SourceConfig(pol_product=True, wavepacket=_wavepacket(),
                        brightness_pairs_hz=DEFAULT_BRIGHTNESS)


# Cluster-state run (tomography and witness).
#
# Branch polarization model: (1-p)|Phi_err><Phi_err| + p I/4 with a coherent
# phase error d per branch, so F = (1-p) cos^2(d/2) + p/4 and C = 1 - 3p/2.
# C = 0.895 fixes p = 0.07; the branch phases then set F(Phi+) = 0.845 and
# F(Phi-) = 0.910 (paper: 0.83 +- 0.11 and 0.91 +- 0.10).  v_path is fixed by
# the x_A x_B stabilizers: E = v (1-p) cos^2((d+ - d-)/2) o0^4-free... see
# notes: E = v * (1-p) * cos^2(dd/2) * o0^2 = 0.8092.
CLUSTER_P_POL = 0.07
CLUSTER_PHASE_ERR_RA_LB = 0.6768  # branch compensated to |Phi+> (extra HWP)
CLUSTER_PHASE_ERR_LA_RB = 0.4033  # branch compensated to |Phi->
CLUSTER_V_PATH = 0.899


def cluster_source() -> SourceConfig:
    return SourceConfig(
        p_pol=CLUSTER_P_POL, v_path=CLUSTER_V_PATH, wavepacket=_wavepacket(),
        pol_phase_error_ra_lb=CLUSTER_PHASE_ERR_RA_LB,
        pol_phase_error_la_rb=CLUSTER_PHASE_ERR_LA_RB,
        accidental_rate_hz=0.4, brightness_pairs_hz=DEFAULT_BRIGHTNESS)


def si_source() -> SourceConfig:
    """Bare-source polarization entanglement: F = 1 - 3p/4 = 0.90."""
    return SourceConfig(theta=math.pi, p_pol=4.0 * (1.0 - 0.90) / 3.0,
                        wavepacket=_wavepacket(),
                        brightness_pairs_hz=DEFAULT_BRIGHTNESS)


# Grover run: the readout reduces to computational correlations, which only
# the polarization white noise degrades: s = 1 - p/2 = 0.962.
GROVER_P_POL = 0.076
GROVER_BRIGHTNESS = 1957.0  # makes the post-selected protocol rate ~17 Hz


def grover_source() -> SourceConfig:
    return SourceConfig(p_pol=GROVER_P_POL, wavepacket=_wavepacket(overlap=1.0),
                        brightness_pairs_hz=GROVER_BRIGHTNESS)


DEFAULT_DELAYS_UM = tuple(np.linspace(-60.0, 60.0, 41))

DEFAULT_SHOTS = {
    "hom": 200_000,
    "hescan": 400_000,
    "pathscan": 400_000,
    "tomo": 100_000,
    "witness": 30_000,
    "grover": 40_000,
}
