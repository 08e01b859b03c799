"""Single-photon mode labels for the two-arm chip.

A mode is (arm, spatial, polarization, temporal).  Spatial modes ell/r are
the chip inputs, ell'/r' the outputs; a photon never superposes input and
output modes of the same arm.  The temporal index points into a two-element
orthonormal wavepacket basis {tau0, tau_perp}.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Arm(enum.IntEnum):
    A = 0
    B = 1


class Spatial(enum.IntEnum):
    ELL = 0
    R = 1
    ELL_PRIME = 2
    R_PRIME = 3

    @property
    def is_output(self) -> bool:
        return self >= Spatial.ELL_PRIME

    @property
    def side(self) -> str:
        """'ell' or 'r', ignoring the input/output prime."""
        return "ell" if self in (Spatial.ELL, Spatial.ELL_PRIME) else "r"


class Pol(enum.IntEnum):
    H = 0
    V = 1


N_TEMPORAL = 2
DIM_ARM = len(Spatial) * len(Pol)            # spatial x pol block of one arm
DIM_SINGLE = len(Arm) * DIM_ARM * N_TEMPORAL  # full single-photon space

PRE_CHIP = "pre-chip"
POST_CHIP = "post-chip"


@dataclass(frozen=True, order=True)
class ModeLabel:
    arm: Arm
    spatial: Spatial
    pol: Pol
    temporal: int = 0

    def __post_init__(self):
        if self.temporal not in (0, 1):
            raise ValueError(f"temporal index must be 0 or 1, got {self.temporal}")

    @property
    def stage(self) -> str:
        return POST_CHIP if self.spatial.is_output else PRE_CHIP

    def index(self) -> int:
        """Position in the canonical single-photon basis."""
        return ((self.arm * len(Spatial) + self.spatial) * len(Pol) + self.pol) * N_TEMPORAL + self.temporal

    def replace(self, **kw) -> "ModeLabel":
        fields = {"arm": self.arm, "spatial": self.spatial, "pol": self.pol, "temporal": self.temporal}
        fields.update(kw)
        return ModeLabel(**fields)

    def __repr__(self):
        prime = "'" if self.spatial.is_output else ""
        side = "l" if self.spatial.side == "ell" else "r"
        return f"{self.pol.name}|{side}{prime}_{self.arm.name},t{self.temporal}"


def label_from_index(i: int) -> ModeLabel:
    i, temporal = divmod(i, N_TEMPORAL)
    i, pol = divmod(i, len(Pol))
    arm, spatial = divmod(i, len(Spatial))
    return ModeLabel(Arm(arm), Spatial(spatial), Pol(pol), temporal)


ALL_LABELS = tuple(label_from_index(i) for i in range(DIM_SINGLE))
