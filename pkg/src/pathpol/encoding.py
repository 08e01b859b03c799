"""Qubit view of the two-photon state.

Qubit convention: polarization |0> = H, |1> = V; path |0> = ell, |1> = r
(and |0> = ell', |1> = r' after the chip), i.e. z|ell> = +|ell>,
z|r> = -|r> -- the sign choice that reproduces the measured stabilizer sign
pattern.  Internal qubit order is (pi_A, k_A, pi_B, k_B); the one-way-
computation order (1,2,3,4) = (k_B, pi_A, k_A, pi_B) is a permutation away.
"""

from __future__ import annotations

import numpy as np

from .modes import Arm, ModeLabel, Pol, Spatial
from .states import MixedState, as_mixed

QUBITS = ("pi_A", "k_A", "pi_B", "k_B")
GROVER_ORDER = ("k_B", "pi_A", "k_A", "pi_B")

I2 = np.eye(2, dtype=complex)
PAULI = {
    "I": I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def path_bit(spatial: Spatial) -> int:
    return 0 if spatial.side == "ell" else 1


def kron_all(mats) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def pauli_on(ops: dict[str, str]) -> np.ndarray:
    """16x16 operator from {qubit name: pauli letter}, identity elsewhere."""
    return kron_all([PAULI[ops.get(q, "I")] for q in QUBITS])


def two_photon_to_qubit_dm(state) -> np.ndarray:
    """16x16 density matrix over (pi_A, k_A, pi_B, k_B), temporal traced out.

    Requires every amplitude to hold exactly one photon per arm.
    """
    rho = np.zeros((16, 16), dtype=complex)
    for w, pure in as_mixed(state).components:
        m = np.zeros((16, 4), dtype=complex)  # qubit index x temporal pair
        for (a, b), c in pure.amplitudes.items():
            if a.arm == b.arm:
                raise ValueError("qubit encoding needs one photon per arm, "
                                 f"got pair on arm {a.arm.name}")
            pa, pb = (a, b) if a.arm == Arm.A else (b, a)
            q = ((pa.pol * 2 + path_bit(pa.spatial)) * 2 + pb.pol) * 2 + path_bit(pb.spatial)
            t = pa.temporal * 2 + pb.temporal
            m[q, t] += c
        rho += w * (m @ m.conj().T)
    return rho


def permute_qubits_vec(vec: np.ndarray, perm) -> np.ndarray:
    """Reorder a 16-dim state vector from QUBITS order to `perm` order."""
    src = [QUBITS.index(q) for q in perm]
    return vec.reshape([2] * 4).transpose(src).reshape(16)


def permute_qubits_dm(rho: np.ndarray, perm) -> np.ndarray:
    src = [QUBITS.index(q) for q in perm]
    axes = src + [s + 4 for s in src]
    return rho.reshape([2] * 8).transpose(axes).reshape(16, 16)


def reduced_single_qubit(rho: np.ndarray, qubit: str) -> np.ndarray:
    k = QUBITS.index(qubit)
    t = rho.reshape([2] * 8)
    for axis in reversed([i for i in range(4) if i != k]):
        t = np.trace(t, axis1=axis, axis2=axis + (t.ndim // 2))
    return t


def c4_vector() -> np.ndarray:
    """Ideal |C4> over (pi_A, k_A, pi_B, k_B)."""
    v = np.zeros(16, dtype=complex)
    for bits, amp in ((0b0100, 0.5), (0b1110, 0.5), (0b0001, 0.5), (0b1011, -0.5)):
        v[bits] = amp
    return v
