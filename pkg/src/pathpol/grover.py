"""One-way Grover search on the box cluster derived from |C4>.

Physical qubit order (1,2,3,4) = (k_B, pi_A, k_A, pi_B).  The measurement
frame is rotated by

    U_box = sigma_x H  (x)  Z H  (x)  sigma_z H  (x)  Z H,

which maps |C4> exactly onto the box-cluster graph state (|+>^4 entangled by
CZ on the cycle 1-2-3-4-1); relative to the published sigma_x H (x) H (x)
sigma_z H (x) H this adds Z on the two polarization qubits, a free outcome
relabeling in front of the equatorial readout.  The black box tags an item
by the basis choices alpha, beta in {0, pi} on qubits 1 and 4 (bases
(|0> +- e^{i alpha}|1>)/sqrt2); qubits 2 and 3 are read in the X basis.

Derived feed-forward map (validated by exhaustive enumeration): the tagged
item is identified as bits (s1 xor s3, s2 xor s4); post-selection keeps the
trivial-byproduct events (s1, s4) = (0, 0), a 1/4 fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .elements import apply_all, beam_splitter, phase_plate, pol_rotation, spatial_swap
from .encoding import (GROVER_ORDER, c4_vector, permute_qubits_dm,
                       permute_qubits_vec, two_photon_to_qubit_dm)
from .modes import Arm, Spatial
from .scans import record_rng
from .source import EfficiencyTable, BRANCH_LA_RB, BRANCH_RA_LB
from .states import MixedState

MODES = ("postselect", "feedforward")

#: Box-cluster graph edges over qubits 1..4 (0-indexed), the square cycle.
BOX_EDGES = ((0, 1), (1, 2), (2, 3), (3, 0))


@dataclass(frozen=True)
class GroverRun:
    tag: tuple[int, int]
    mode: str = "feedforward"
    shots: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.shots <= 0:
            raise ValueError("shots must be positive")
        if tuple(self.tag) not in {(a, b) for a in (0, 1) for b in (0, 1)}:
            raise ValueError("tag must be two bits")

    @property
    def tag_index(self) -> int:
        return 2 * self.tag[0] + self.tag[1]


@dataclass(frozen=True)
class GroverResult:
    tag: tuple[int, int]
    mode: str
    histogram: tuple[float, float, float, float]  # retained events per item
    success_rate: float
    success_sigma: float
    retained_fraction: float
    shots: int

    def __post_init__(self):
        if not 0.0 <= self.success_rate <= 1.0 + 1e-12:
            raise ValueError("success rate out of range")


def box_rotation_ops():
    """The mode unitaries implementing the box-cluster basis rotation."""
    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    zh = np.diag([1.0, -1.0]) @ h
    return (
        beam_splitter("both"),                       # H on both path qubits
        phase_plate(Spatial.R_PRIME, Arm.A, math.pi),  # sigma_z on k_A
        spatial_swap(Arm.B, Spatial.ELL_PRIME, Spatial.R_PRIME),  # sigma_x on k_B
        pol_rotation(zh, Arm.A, [Spatial.ELL_PRIME, Spatial.R_PRIME], name="ZH@pi_A"),
        pol_rotation(zh, Arm.B, [Spatial.ELL_PRIME, Spatial.R_PRIME], name="ZH@pi_B"),
    )


def box_cluster(state: MixedState) -> MixedState:
    """Rotate a |C4>-form state into the box-cluster frame (photonic ops)."""
    return apply_all(state, box_rotation_ops())


def box_cluster_graph_state() -> np.ndarray:
    """|+>^4 with CZ on the square-cycle edges, in the (1,2,3,4) qubit order."""
    v = np.ones(16, dtype=complex) / 4.0
    for b in range(16):
        bits = [(b >> (3 - k)) & 1 for k in range(4)]
        sign = 1
        for i, j in BOX_EDGES:
            if bits[i] and bits[j]:
                sign = -sign
        v[b] *= sign
    return v


def _basis_vector(alpha: float, s: int) -> np.ndarray:
    return np.array([1.0, (1 - 2 * s) * np.exp(1j * alpha)], dtype=complex) / math.sqrt(2)


def outcome_probabilities(rotated: MixedState, tag) -> np.ndarray:
    """P(s1 s2 s3 s4) for the measurement pattern B(alpha), X, X, B(beta)."""
    rho = permute_qubits_dm(two_photon_to_qubit_dm(rotated), GROVER_ORDER)
    alpha, beta = tag[0] * math.pi, tag[1] * math.pi
    probs = np.empty(16)
    for s in range(16):
        s1, s2, s3, s4 = (s >> 3) & 1, (s >> 2) & 1, (s >> 1) & 1, s & 1
        v = np.array([1.0 + 0j])
        for vec in (_basis_vector(alpha, s1), _basis_vector(0.0, s2),
                    _basis_vector(0.0, s3), _basis_vector(beta, s4)):
            v = np.kron(v, vec)
        probs[s] = max(float(np.real(v.conj() @ rho @ v)), 0.0)
    return probs / probs.sum()


def relabeled_item(s1: int, s2: int, s3: int, s4: int) -> int:
    """Feed-forward XOR map from the four outcome bits to the item label."""
    return 2 * (s1 ^ s3) + (s2 ^ s4)


def run_grover(rotated: MixedState, run: GroverRun, sample: bool = True) -> GroverResult:
    """Execute the search on a box-cluster-frame state."""
    probs = outcome_probabilities(rotated, run.tag)
    if sample:
        counts = record_rng(run.seed, run.tag_index).multinomial(run.shots, probs)
    else:
        counts = probs * run.shots
    hist = np.zeros(4)
    retained = 0.0
    for s in range(16):
        s1, s2, s3, s4 = (s >> 3) & 1, (s >> 2) & 1, (s >> 1) & 1, s & 1
        if run.mode == "postselect" and (s1, s4) != (0, 0):
            continue
        hist[relabeled_item(s1, s2, s3, s4)] += counts[s]
        retained += counts[s]
    if retained == 0:
        raise RuntimeError("no retained events; increase shots")
    success = float(hist[run.tag_index] / retained)
    n_eff = retained if sample else run.shots
    sigma = math.sqrt(max(success * (1 - success), 0.0) / max(n_eff, 1))
    return GroverResult(tag=tuple(run.tag), mode=run.mode, histogram=tuple(hist),
                        success_rate=success, success_sigma=float(sigma),
                        retained_fraction=float(retained / run.shots), shots=run.shots)


def derive_feedforward_map(rotated_ideal: MixedState):
    """Re-derive the byproduct relabeling from exhaustive enumeration.

    For every tag and every byproduct pair (s1, s4) the ideal readout
    (s2, s3) must be deterministic and related to the tag by XOR with
    (s4, s1); returns {(tag, (s1, s4)): (s2, s3)} and raises if the
    structure is not an XOR map.
    """
    table = {}
    for t1 in (0, 1):
        for t2 in (0, 1):
            probs = outcome_probabilities(rotated_ideal, (t1, t2))
            for s in range(16):
                if probs[s] < 1e-12:
                    continue
                s1, s2, s3, s4 = (s >> 3) & 1, (s >> 2) & 1, (s >> 1) & 1, s & 1
                key = ((t1, t2), (s1, s4))
                if key in table and table[key] != (s2, s3):
                    raise RuntimeError(f"readout not deterministic at {key}")
                table[key] = (s2, s3)
                if (s1 ^ s3, s2 ^ s4) != (t1, t2):
                    raise RuntimeError(f"relabeling is not the XOR map at {key}")
    if len(table) != 16:
        raise RuntimeError("missing byproduct branches in the enumeration")
    return table


def protocol_rate(result: GroverResult, brightness_pairs_hz: float,
                  efficiencies: EfficiencyTable) -> float:
    """Retained-coincidence rate in Hz (branch-averaged pair efficiency)."""
    if brightness_pairs_hz < 0:
        raise ValueError("brightness must be >= 0")
    eta = 0.5 * (efficiencies.pair(BRANCH_RA_LB) + efficiencies.pair(BRANCH_LA_RB))
    return brightness_pairs_hz * eta * result.retained_fraction
