"""Coincidence detection between two spatially distinct modes.

Detectors are time-insensitive within the coincidence window (temporal labels
are traced out) and may carry a polarization analyzer described by a unit
Bloch vector: +z projects onto H, -z onto V, +x onto D, +y onto R.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .modes import Arm, Pol, Spatial, DIM_SINGLE, ALL_LABELS
from .states import MixedState, TwoPhotonState, as_mixed


@dataclass(frozen=True)
class DetectorSpec:
    arm: Arm
    spatial: Spatial
    pol_bloch: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.pol_bloch is not None:
            v = np.asarray(self.pol_bloch, dtype=float)
            if abs(np.linalg.norm(v) - 1.0) > 1e-9:
                raise ValueError("pol_bloch must be a unit vector")


BLOCH_H = (0.0, 0.0, 1.0)
BLOCH_V = (0.0, 0.0, -1.0)
BLOCH_D = (1.0, 0.0, 0.0)
BLOCH_A = (-1.0, 0.0, 0.0)
BLOCH_R = (0.0, 1.0, 0.0)
BLOCH_L = (0.0, -1.0, 0.0)


def pol_projector(bloch) -> np.ndarray:
    x, y, z = bloch
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return 0.5 * (np.eye(2) + x * sx + y * sy + z * sz)


def _single_photon_projector(det: DetectorSpec) -> np.ndarray:
    """Projector onto the detector's spatial mode (x optional analyzer)."""
    p = np.zeros((DIM_SINGLE, DIM_SINGLE), dtype=complex)
    pol = pol_projector(det.pol_bloch) if det.pol_bloch is not None else np.eye(2)
    for a in ALL_LABELS:
        if a.arm != det.arm or a.spatial != det.spatial:
            continue
        for b in ALL_LABELS:
            if b.arm != det.arm or b.spatial != det.spatial or b.temporal != a.temporal:
                continue
            p[a.index(), b.index()] = pol[a.pol, b.pol]
    return p


def coincidence_probability(state, det1: DetectorSpec, det2: DetectorSpec) -> float:
    """Probability that one photon fires each detector."""
    if (det1.arm, det1.spatial) == (det2.arm, det2.spatial):
        raise ValueError("coincidence detectors must sit on distinct spatial modes")
    p1 = _single_photon_projector(det1)
    p2 = _single_photon_projector(det2)
    total = 0.0
    for w, pure in as_mixed(state).components:
        psi = pure.to_ordered_tensor()
        # P1 x P2 + P2 x P1 is a projector because the spatial modes differ.
        proj = p1 @ psi @ p2.T + p2 @ psi @ p1.T
        total += w * float(np.real(np.sum(np.conj(psi) * proj)))
    return min(max(total, 0.0), 1.0)
