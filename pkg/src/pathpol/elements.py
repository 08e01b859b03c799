"""Chip elements as single-photon mode unitaries and their two-photon action.

Beam splitter convention (real Hadamard on the spatial pair, identity on
polarization):

    |ell> -> (|ell'> + |r'>)/sqrt2        |r> -> (|ell'> - |r'>)/sqrt2

so the diagonal path state |d> = (|ell>+|r>)/sqrt2 exits at |ell'> and the
antidiagonal |a> at |r'>.  The inverse direction (primed -> unprimed) is
filled in symmetrically to keep the matrix unitary; physical states only ever
occupy one of the two subspaces per arm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .modes import (Arm, Pol, Spatial, ModeLabel, DIM_ARM, DIM_SINGLE,
                    N_TEMPORAL, PRE_CHIP, POST_CHIP)
from .states import MixedState, StageError, TwoPhotonState, as_mixed

UNITARITY_TOL = 1e-10
_SQRT2 = math.sqrt(2.0)

ARMS_BOTH = "both"


def _block_index(spatial: Spatial, pol: Pol) -> int:
    return spatial * len(Pol) + pol


@dataclass(frozen=True)
class ModeUnitary:
    """Unitary on the (spatial x polarization) space of one arm (or both).

    `advances_stage` marks elements that move photons from the chip inputs to
    the outputs (the beam splitters); all other plates act within a stage.
    """

    matrix: np.ndarray
    arm: Arm | str
    advances_stage: bool = False
    name: str = field(default="", compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (DIM_ARM, DIM_ARM):
            raise ValueError(f"mode unitary must be {DIM_ARM}x{DIM_ARM}, got {m.shape}")
        if np.max(np.abs(m.conj().T @ m - np.eye(DIM_ARM))) > UNITARITY_TOL:
            raise ValueError(f"matrix is not unitary within {UNITARITY_TOL}")
        if self.arm not in (Arm.A, Arm.B, ARMS_BOTH):
            raise ValueError(f"arm must be Arm.A, Arm.B or '{ARMS_BOTH}'")
        object.__setattr__(self, "matrix", m)

    def arms(self) -> tuple[Arm, ...]:
        return (Arm.A, Arm.B) if self.arm == ARMS_BOTH else (self.arm,)

    def single_photon_matrix(self) -> np.ndarray:
        """Embed into the full single-photon space, identity on temporal."""
        u = np.eye(len(Arm) * DIM_ARM, dtype=complex)
        for arm in self.arms():
            lo = arm * DIM_ARM
            u[lo:lo + DIM_ARM, lo:lo + DIM_ARM] = self.matrix
        return np.kron(u, np.eye(N_TEMPORAL))

    def dagger(self) -> "ModeUnitary":
        return ModeUnitary(self.matrix.conj().T, self.arm, self.advances_stage,
                           name=f"{self.name}^dag" if self.name else "")

    def support_spatials(self) -> set[Spatial]:
        """Spatial modes on which the matrix differs from the identity."""
        out = set()
        eye = np.eye(DIM_ARM)
        for sp in Spatial:
            i = _block_index(sp, Pol.H)
            rows = np.abs(self.matrix[i:i + 2] - eye[i:i + 2]).max()
            cols = np.abs(self.matrix[:, i:i + 2] - eye[:, i:i + 2]).max()
            if max(rows, cols) > 1e-14:
                out.add(sp)
        return out


def beam_splitter(arm: Arm | str) -> ModeUnitary:
    """Balanced polarization-insensitive beam splitter of one chip arm."""
    s = np.zeros((len(Spatial), len(Spatial)))
    s[Spatial.ELL_PRIME, Spatial.ELL] = s[Spatial.R_PRIME, Spatial.ELL] = 1 / _SQRT2
    s[Spatial.ELL_PRIME, Spatial.R] = 1 / _SQRT2
    s[Spatial.R_PRIME, Spatial.R] = -1 / _SQRT2
    s[:2, 2:] = s[2:, :2].T
    m = np.kron(s, np.eye(len(Pol)))
    name = "BS" if arm == ARMS_BOTH else f"BS_{Arm(arm).name}"
    return ModeUnitary(m, arm, advances_stage=True, name=name)


def _rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def jones_retarder(retardance: float, angle: float) -> np.ndarray:
    """Jones matrix of a retarder with fast axis at `angle` from H."""
    r = _rotation(angle)
    return r @ np.diag([1.0, np.exp(1j * retardance)]) @ r.T


def jones_hwp(angle: float) -> np.ndarray:
    """Half-wave plate; HWP(0) = diag(1, -1)."""
    return jones_retarder(math.pi, angle)


def jones_qwp(angle: float) -> np.ndarray:
    return jones_retarder(math.pi / 2, angle)


def _embed_jones(jones: np.ndarray, spatial_modes, arm, name: str) -> ModeUnitary:
    m = np.eye(DIM_ARM, dtype=complex)
    for sp in spatial_modes:
        i = _block_index(Spatial(sp), Pol.H)
        m[i:i + 2, i:i + 2] = jones
    return ModeUnitary(m, arm, name=name)


def waveplate(kind: str, angle: float, spatial_mode: Spatial, arm: Arm | str) -> ModeUnitary:
    """HWP or QWP at `angle` (radians) acting on one spatial mode's polarization."""
    kind = kind.upper()
    if kind == "HWP":
        jones = jones_hwp(angle)
    elif kind == "QWP":
        jones = jones_qwp(angle)
    else:
        raise ValueError(f"waveplate kind must be 'HWP' or 'QWP', got {kind!r}")
    return _embed_jones(jones, [spatial_mode], arm,
                        name=f"{kind}({math.degrees(angle):.4g}deg)@{Spatial(spatial_mode).name}")


def pol_rotation(jones: np.ndarray, arm: Arm | str, spatial_modes=None,
                 name: str = "pol") -> ModeUnitary:
    """Arbitrary Jones unitary on the given spatial modes (default: all four)."""
    if spatial_modes is None:
        spatial_modes = tuple(Spatial)
    return _embed_jones(np.asarray(jones, dtype=complex), spatial_modes, arm, name)


def phase_plate(spatial_mode: Spatial, arm: Arm | str, phase: float) -> ModeUnitary:
    """Multiply both polarizations of one spatial mode by exp(i * phase)."""
    m = np.eye(DIM_ARM, dtype=complex)
    i = _block_index(Spatial(spatial_mode), Pol.H)
    m[i, i] = m[i + 1, i + 1] = np.exp(1j * phase)
    return ModeUnitary(m, arm, name=f"phase({phase:.4g})@{Spatial(spatial_mode).name}")


def spatial_swap(arm: Arm | str, s1: Spatial, s2: Spatial) -> ModeUnitary:
    """Relabel two spatial modes of an arm (polarization carried along)."""
    if s1.is_output != s2.is_output:
        raise StageError("cannot swap a pre-chip mode with a post-chip mode")
    m = np.eye(DIM_ARM, dtype=complex)
    i, j = _block_index(s1, Pol.H), _block_index(s2, Pol.H)
    for k in range(2):
        m[[i + k, j + k]] = m[[j + k, i + k]]
    return ModeUnitary(m, arm, name=f"swap({s1.name},{s2.name})")


def _apply_single_photon_matrix(state: TwoPhotonState, u: np.ndarray) -> TwoPhotonState:
    """Evolve both photons by the single-photon unitary u (dense route)."""
    psi = state.to_ordered_tensor()
    psi = u @ psi @ u.T
    return TwoPhotonState.from_ordered_tensor(psi, tol=1e-14)


def apply(state, u: ModeUnitary):
    """Apply a mode unitary to a TwoPhotonState or MixedState.

    A plate addressing only modes of the stage the arm is not at is a
    configuration mistake and raises StageError (the beam splitter itself is
    bidirectional: it takes a pre-chip arm to post-chip and vice versa).
    """
    if isinstance(state, MixedState):
        return state.map_states(lambda s: apply(s, u))
    if not u.advances_stage:
        support = u.support_spatials()
        if support:
            stages = {POST_CHIP if sp.is_output else PRE_CHIP for sp in support}
            for arm in u.arms():
                arm_stage = state.arm_stage(arm)
                if arm_stage is not None and arm_stage not in stages:
                    raise StageError(
                        f"{u.name or 'plate'} addresses {sorted(s.name for s in support)} "
                        f"but arm {arm.name} is {arm_stage}")
    return _apply_single_photon_matrix(state, u.single_photon_matrix())


def apply_all(state, unitaries):
    for u in unitaries:
        state = apply(state, u)
    return state
