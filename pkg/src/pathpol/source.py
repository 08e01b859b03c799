"""Source model: the hyperentangled state, compensation, cluster preparation.

The emitted two-photon state is (Eq.-(1) form)

    |Omega> = 1/2 (|H_A H_B> + e^{i theta}|V_A V_B>)
              (x) (|r_A ell_B> + e^{i phi}|ell_A r_B>)

with photon A in the arm-A spatial modes and photon B in arm B.  Noise is
factorized per degree of freedom: a white-noise admixture of weight p_pol on
the polarization factor, path dephasing that scales the off-diagonal path
coherence by v_path (realized as a two-component mixture), small per-branch
polarization phase errors (residual compensation error), and the wavepacket
overlap model of `wavepacket` for the temporal labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .elements import apply, pol_rotation, waveplate
from .modes import Arm, ModeLabel, Pol, Spatial
from .states import MixedState, TwoPhotonState, canonical_pair
from .wavepacket import WavepacketConfig, temporal_overlap

# (arm-A spatial, arm-B spatial) of the two correlated mode pairs; the first
# carries no path phase, the second carries e^{i phi}.
BRANCH_RA_LB = (Spatial.R, Spatial.ELL)
BRANCH_LA_RB = (Spatial.ELL, Spatial.R)


@dataclass(frozen=True)
class EfficiencyTable:
    """Per-input-mode total transmissions (fiber array x chip x collection)."""

    ell_a: float = 0.22
    r_a: float = 0.23
    ell_b: float = 0.13
    r_b: float = 0.18

    def __post_init__(self):
        for name in ("ell_a", "r_a", "ell_b", "r_b"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"efficiency {name} must be in (0, 1], got {v}")

    def mode(self, arm: Arm, spatial: Spatial) -> float:
        key = f"{'ell' if spatial.side == 'ell' else 'r'}_{'a' if arm == Arm.A else 'b'}"
        return getattr(self, key)

    def pair(self, branch) -> float:
        sp_a, sp_b = branch
        return self.mode(Arm.A, sp_a) * self.mode(Arm.B, sp_b)


@dataclass(frozen=True)
class SourceConfig:
    theta: float = 0.0
    phi: float = 0.0
    p_pol: float = 0.0
    v_path: float = 1.0
    wavepacket: WavepacketConfig = field(default_factory=WavepacketConfig)
    accidental_rate_hz: float = 0.0
    brightness_pairs_hz: float = 1700.0
    efficiencies: EfficiencyTable = field(default_factory=EfficiencyTable)
    pol_phase_error_ra_lb: float = 0.0
    pol_phase_error_la_rb: float = 0.0
    pol_product: bool = False  # restrict polarization to |H_A H_B>

    def __post_init__(self):
        if not 0.0 <= self.p_pol <= 1.0:
            raise ValueError(f"p_pol must be in [0, 1], got {self.p_pol}")
        if not 0.0 <= self.v_path <= 1.0:
            raise ValueError(f"v_path must be in [0, 1], got {self.v_path}")
        if self.accidental_rate_hz < 0:
            raise ValueError("accidental_rate_hz must be >= 0")
        if self.brightness_pairs_hz <= 0:
            raise ValueError("brightness_pairs_hz must be > 0")

    def ideal(self) -> "SourceConfig":
        return replace(self, p_pol=0.0, v_path=1.0,
                       wavepacket=replace(self.wavepacket, overlap_at_zero=1.0),
                       accidental_rate_hz=0.0,
                       pol_phase_error_ra_lb=0.0, pol_phase_error_la_rb=0.0)


def _delayed_temporal(label: ModeLabel, overlap: float):
    """Split a ket on a delayed (ell-side) mode over the temporal basis."""
    if label.spatial.side == "r" or overlap == 1.0:
        return [(label, 1.0)]
    ortho = math.sqrt(max(0.0, 1.0 - overlap * overlap))
    parts = [(label.replace(temporal=0), overlap)]
    if ortho > 0.0:
        parts.append((label.replace(temporal=1), ortho))
    return parts


def _hyper_pure(pol_terms_b1, pol_terms_b2, phi: float, overlap: float) -> TwoPhotonState:
    """Assemble a pure two-branch state from per-branch polarization terms.

    pol_terms_* are lists of (pol_A, pol_B, amplitude) with the amplitudes of
    each branch summing to 1/2 in squared magnitude.
    """
    amps = {}
    for branch, pol_terms, path_phase in (
        (BRANCH_RA_LB, pol_terms_b1, 1.0),
        (BRANCH_LA_RB, pol_terms_b2, np.exp(1j * phi)),
    ):
        sp_a, sp_b = branch
        for pol_a, pol_b, c in pol_terms:
            for lab_a, ta in _delayed_temporal(ModeLabel(Arm.A, sp_a, pol_a), overlap):
                for lab_b, tb in _delayed_temporal(ModeLabel(Arm.B, sp_b, pol_b), overlap):
                    key = canonical_pair(lab_a, lab_b)
                    amps[key] = amps.get(key, 0.0) + c * path_phase * ta * tb
    return TwoPhotonState(amps)


def emit_hyperentangled(cfg: SourceConfig) -> MixedState:
    """Emit the noisy hyperentangled state at the chip input."""
    overlap = temporal_overlap(cfg.wavepacket)

    if cfg.pol_product:
        amp = 1.0 / math.sqrt(2.0)
        signal = [[(Pol.H, Pol.H, amp)], [(Pol.H, Pol.H, amp)]]
        white: list = []
    else:
        z1 = 0.5 * np.exp(1j * (cfg.theta + cfg.pol_phase_error_ra_lb))
        z2 = 0.5 * np.exp(1j * (cfg.theta + cfg.pol_phase_error_la_rb))
        signal = [[(Pol.H, Pol.H, 0.5), (Pol.V, Pol.V, z1)],
                  [(Pol.H, Pol.H, 0.5), (Pol.V, Pol.V, z2)]]
        half = 1.0 / math.sqrt(2.0)
        white = [[(pa, pb, half)] for pa in Pol for pb in Pol]

    w_signal = 1.0 - cfg.p_pol if not cfg.pol_product else 1.0
    w_white = cfg.p_pol / 4.0 if not cfg.pol_product else 0.0

    components = []
    for phi, w_phase in ((cfg.phi, (1.0 + cfg.v_path) / 2.0),
                         (cfg.phi + math.pi, (1.0 - cfg.v_path) / 2.0)):
        if w_phase == 0.0:
            continue
        components.append((w_signal * w_phase,
                           _hyper_pure(signal[0], signal[1], phi, overlap)))
        for terms in white:
            components.append((w_white * w_phase,
                               _hyper_pure(terms, terms, phi, overlap)))
    return MixedState.of(components)


@dataclass(frozen=True)
class CompensationSetting:
    """Per-mode polarization unitaries applied before the chip."""

    ell_a: np.ndarray
    r_a: np.ndarray
    ell_b: np.ndarray
    r_b: np.ndarray

    @staticmethod
    def identity() -> "CompensationSetting":
        i = np.eye(2, dtype=complex)
        return CompensationSetting(i, i, i, i)

    @staticmethod
    def paper() -> "CompensationSetting":
        """H->H, V->V on the arm-A modes; H<->V on ell_B and r_B."""
        i = np.eye(2, dtype=complex)
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        return CompensationSetting(i, i, x, x)

    def unitaries(self):
        return (
            pol_rotation(self.ell_a, Arm.A, [Spatial.ELL], name="comp@ell_A"),
            pol_rotation(self.r_a, Arm.A, [Spatial.R], name="comp@r_A"),
            pol_rotation(self.ell_b, Arm.B, [Spatial.ELL], name="comp@ell_B"),
            pol_rotation(self.r_b, Arm.B, [Spatial.R], name="comp@r_B"),
        )


def apply_compensation(state, setting: CompensationSetting):
    out = state
    for u in setting.unitaries():
        out = apply(out, u)
    return out


def emit_cluster(cfg: SourceConfig) -> MixedState:
    """Prepare |C4> = (|Phi+>|r_A ell_B> + |Phi->|ell_A r_B>)/sqrt2.

    The source phases are pinned to theta = pi, phi = 0 (both branches carry
    |Phi->), then the zero-degree HWP on r_A flips the |r_A ell_B> branch to
    |Phi+>.  Noise parameters of cfg are honored.
    """
    base = replace(cfg, theta=math.pi, phi=0.0, pol_product=False)
    state = emit_hyperentangled(base)
    return apply(state, waveplate("HWP", 0.0, Spatial.R, Arm.A))
