"""Two-photon bosonic states as amplitude maps over unordered mode pairs.

Convention: the amplitude c stored for an unordered pair {m, n} is defined so
that |c|^2 is directly the probability of detecting the pair in those modes.
A doubly-occupied mode {m, m} therefore stores the amplitude of the
normalized two-photon Fock state |2_m>; the bosonic sqrt(2) bookkeeping lives
entirely inside the evolution routine (see elements.apply).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .modes import Arm, ModeLabel, PRE_CHIP, POST_CHIP, DIM_SINGLE, label_from_index

NORM_TOL = 1e-12
_SQRT2 = math.sqrt(2.0)

PairAmplitudes = dict[tuple[ModeLabel, ModeLabel], complex]


def canonical_pair(m: ModeLabel, n: ModeLabel) -> tuple[ModeLabel, ModeLabel]:
    return (m, n) if m <= n else (n, m)


def canonicalize(amplitudes) -> PairAmplitudes:
    """Merge amplitudes that differ only by pair order; drop exact zeros."""
    out: PairAmplitudes = {}
    for (m, n), c in amplitudes.items() if isinstance(amplitudes, dict) else amplitudes:
        key = canonical_pair(m, n)
        out[key] = out.get(key, 0.0) + complex(c)
    return {k: v for k, v in out.items() if v != 0}


class StageError(ValueError):
    """A state or operation mixes pre- and post-chip modes on one arm."""


class TwoPhotonState:
    """Pure two-photon state over canonical unordered mode pairs."""

    def __init__(self, amplitudes, normalize: bool = False):
        amps = canonicalize(amplitudes)
        if not amps:
            raise ValueError("state has no amplitudes")
        norm2 = sum(abs(c) ** 2 for c in amps.values())
        if normalize:
            s = 1.0 / math.sqrt(norm2)
            amps = {k: v * s for k, v in amps.items()}
        elif abs(norm2 - 1.0) > 1e-9:
            raise ValueError(f"state is not normalized: sum |c|^2 = {norm2!r}")
        self.amplitudes: PairAmplitudes = amps
        self._arm_stages = _arm_stages(amps)

    @property
    def stage(self) -> str:
        """Overall stage; arms may differ when one photon is kept at the inputs."""
        stages = {s for s in self._arm_stages.values() if s is not None}
        if len(stages) == 1:
            return stages.pop()
        return "mixed"

    def arm_stage(self, arm: Arm) -> str | None:
        return self._arm_stages[arm]

    def norm_squared(self) -> float:
        return sum(abs(c) ** 2 for c in self.amplitudes.values())

    def to_ordered_tensor(self) -> np.ndarray:
        """Dense symmetric wavefunction psi[i, j] on the ordered two-photon space."""
        psi = np.zeros((DIM_SINGLE, DIM_SINGLE), dtype=complex)
        for (m, n), c in self.amplitudes.items():
            i, j = m.index(), n.index()
            if i == j:
                psi[i, i] = c
            else:
                psi[i, j] = psi[j, i] = c / _SQRT2
        return psi

    @staticmethod
    def from_ordered_tensor(psi: np.ndarray, tol: float = 0.0) -> "TwoPhotonState":
        if not np.allclose(psi, psi.T, atol=1e-10):
            raise ValueError("ordered tensor is not symmetric")
        amps: PairAmplitudes = {}
        ii, jj = np.nonzero(np.abs(psi) > tol)
        for i, j in zip(ii.tolist(), jj.tolist()):
            if i > j:
                continue
            m, n = label_from_index(i), label_from_index(j)
            amps[(m, n)] = psi[i, j] * (_SQRT2 if i != j else 1.0)
        return TwoPhotonState(amps)

    def overlap(self, other: "TwoPhotonState") -> complex:
        keys = set(self.amplitudes) & set(other.amplitudes)
        return sum(np.conj(self.amplitudes[k]) * other.amplitudes[k] for k in keys)

    def __repr__(self):
        terms = sorted(self.amplitudes.items(), key=lambda kv: (kv[0][0], kv[0][1]))
        body = " + ".join(f"({c:.3g})|{m}, {n}>" for (m, n), c in terms[:8])
        more = "" if len(terms) <= 8 else f" ... ({len(terms)} terms)"
        return f"TwoPhotonState[{body}{more}]"


def _arm_stages(amps: PairAmplitudes) -> dict[Arm, str | None]:
    stages: dict[Arm, set] = {Arm.A: set(), Arm.B: set()}
    for (m, n) in amps:
        stages[m.arm].add(m.stage)
        stages[n.arm].add(n.stage)
    out: dict[Arm, str | None] = {}
    for arm, seen in stages.items():
        if len(seen) > 1:
            raise StageError(f"arm {arm.name} mixes pre- and post-chip modes")
        out[arm] = seen.pop() if seen else None
    return out


@dataclass(frozen=True)
class MixedState:
    """Probabilistic mixture of pure two-photon states."""

    components: tuple[tuple[float, TwoPhotonState], ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("mixture has no components")
        total = sum(w for w, _ in self.components)
        if any(w < -NORM_TOL for w, _ in self.components):
            raise ValueError("negative mixture weight")
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"mixture weights sum to {total!r}, not 1")

    @staticmethod
    def pure(state: TwoPhotonState) -> "MixedState":
        return MixedState(((1.0, state),))

    @staticmethod
    def of(pairs) -> "MixedState":
        """Build from (weight, state) pairs, dropping zero-weight entries."""
        kept = tuple((float(w), s) for w, s in pairs if w > 0.0)
        return MixedState(kept)

    @property
    def stage(self) -> str:
        stages = {s.stage for _, s in self.components}
        return stages.pop() if len(stages) == 1 else "mixed"

    def map_states(self, f) -> "MixedState":
        return MixedState(tuple((w, f(s)) for w, s in self.components))


def as_mixed(state) -> MixedState:
    return state if isinstance(state, MixedState) else MixedState.pure(state)
