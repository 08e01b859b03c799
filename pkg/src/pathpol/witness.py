"""Stabilizer expectation values and the multipartite entanglement witness.

Measurement mechanics per photon: polarization Paulis via analyzer
projectors at the detectors; path x by routing the arm through its beam
splitter (the x eigenstates |d>, |a> exit at ell', r'); path y likewise
after a -pi/2 phase on the r mode; path z by input-mode tagging before the
chip (a simulator idealization -- the chip only provides the x route).

The witness is
    W = 1/2 (4 - <Z_A Z_B> - <Z_A x_A x_B> + <X_A X_B z_A> + <z_A z_B>
             - <Z_B x_A x_B> - <X_A X_B z_B>),
with W = -1 for the ideal cluster and F >= (1 - W)/2.  The paper's term
"X_A z_A X_B" is the same operator as "X_A X_B z_A" (commuting factors on
different qubits).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detection import (BLOCH_A, BLOCH_D, BLOCH_H, BLOCH_L, BLOCH_R, BLOCH_V,
                        DetectorSpec, coincidence_probability)
from .elements import apply, beam_splitter, phase_plate
from .modes import Arm, Spatial
from .scans import record_rng
from .states import MixedState, as_mixed

POL_OPS = ("I", "X", "Y", "Z")
PATH_OPS = ("i", "x", "y", "z")


@dataclass(frozen=True)
class StabilizerSpec:
    """Local operator per qubit in the order (pi_A, k_A, pi_B, k_B)."""

    pol_a: str = "I"
    path_a: str = "i"
    pol_b: str = "I"
    path_b: str = "i"

    def __post_init__(self):
        if self.pol_a not in POL_OPS or self.pol_b not in POL_OPS:
            raise ValueError("polarization operators must be upper-case I/X/Y/Z")
        if self.path_a not in PATH_OPS or self.path_b not in PATH_OPS:
            raise ValueError("path operators must be lower-case i/x/y/z")
        if (self.pol_a, self.path_a, self.pol_b, self.path_b) == ("I", "i", "I", "i"):
            raise ValueError("stabilizer needs at least one non-identity factor")

    @property
    def name(self) -> str:
        parts = []
        for op, sub in ((self.pol_a, "A"), (self.pol_b, "B")):
            if op != "I":
                parts.append(f"{op}_{sub}")
        for op, sub in ((self.path_a, "A"), (self.path_b, "B")):
            if op != "i":
                parts.append(f"{op}_{sub}")
        return " ".join(parts)


#: The six stabilizers of Table 1, keyed by their printed names.
WITNESS_STABILIZERS = {
    "Z_A Z_B": StabilizerSpec(pol_a="Z", pol_b="Z"),
    "Z_A x_A x_B": StabilizerSpec(pol_a="Z", path_a="x", path_b="x"),
    "X_A X_B z_A": StabilizerSpec(pol_a="X", pol_b="X", path_a="z"),
    "z_A z_B": StabilizerSpec(path_a="z", path_b="z"),
    "Z_B x_A x_B": StabilizerSpec(pol_b="Z", path_a="x", path_b="x"),
    "X_A X_B z_B": StabilizerSpec(pol_a="X", pol_b="X", path_b="z"),
}

#: Measured values of Table 1: name -> (expectation, sigma).
TABLE1 = {
    "Z_A Z_B": (0.940, 0.028),
    "X_A X_B z_A": (-0.860, 0.030),
    "X_A X_B z_B": (0.860, 0.030),
    "z_A z_B": (-0.990, 0.007),
    "Z_A x_A x_B": (0.8092, 0.036),
    "Z_B x_A x_B": (0.8081, 0.035),
}

_POL_OUTCOMES = {
    "I": ((None, +1),),
    "Z": ((BLOCH_H, +1), (BLOCH_V, -1)),
    "X": ((BLOCH_D, +1), (BLOCH_A, -1)),
    "Y": ((BLOCH_R, +1), (BLOCH_L, -1)),
}


def _arm_measurement(arm: Arm, pol_op: str, path_op: str):
    """Preparation unitaries plus (detector, sign) outcomes for one arm."""
    preps = []
    if path_op in ("x", "y"):
        if path_op == "y":
            preps.append(phase_plate(Spatial.R, arm, -math.pi / 2))
        preps.append(beam_splitter(arm))
        ports = ((Spatial.ELL_PRIME, +1), (Spatial.R_PRIME, -1))
    elif path_op == "z":
        ports = ((Spatial.ELL, +1), (Spatial.R, -1))
    else:  # path identity: keep pre-chip, sum over input ports
        ports = ((Spatial.ELL, +1), (Spatial.R, +1))
        if path_op != "i":
            raise ValueError(path_op)
    outcomes = []
    for spatial, s_port in ports:
        port_sign = s_port if path_op in ("x", "y", "z") else +1
        for bloch, s_pol in _POL_OUTCOMES[pol_op]:
            outcomes.append((DetectorSpec(arm, spatial, bloch), port_sign * s_pol))
    return preps, outcomes


def stabilizer_outcome_probabilities(state: MixedState, spec: StabilizerSpec):
    """Joint outcome table [(sign, probability), ...]; probabilities sum to 1."""
    preps_a, outcomes_a = _arm_measurement(Arm.A, spec.pol_a, spec.path_a)
    preps_b, outcomes_b = _arm_measurement(Arm.B, spec.pol_b, spec.path_b)
    prepped = as_mixed(state)
    for u in (*preps_a, *preps_b):
        prepped = apply(prepped, u)
    table = []
    for det_a, sign_a in outcomes_a:
        for det_b, sign_b in outcomes_b:
            p = coincidence_probability(prepped, det_a, det_b)
            table.append((sign_a * sign_b, p))
    total = sum(p for _, p in table)
    if abs(total - 1.0) > 1e-9:
        raise RuntimeError(f"outcome probabilities sum to {total}, not 1")
    return table


def measure_stabilizer(state: MixedState, spec: StabilizerSpec, shots: int = 0,
                       seed: int = 0, sample: bool = True) -> tuple[float, float]:
    """Expectation +- binomial sigma from +-1-weighted outcome frequencies.

    With sample=False (or shots=0) the exact expectation is returned with the
    binomial sigma it would have at `shots` samples (0 if shots=0).
    """
    table = stabilizer_outcome_probabilities(state, spec)
    expectation = sum(s * p for s, p in table)
    if not sample or shots == 0:
        sigma = math.sqrt(max(0.0, 1 - expectation ** 2) / shots) if shots else 0.0
        return float(expectation), sigma
    probs = np.clip([p for _, p in table], 0.0, None)
    probs = probs / probs.sum()
    counts = record_rng(seed, 0).multinomial(shots, probs)
    signs = np.array([s for s, _ in table], dtype=float)
    est = float(np.dot(signs, counts) / shots)
    sigma = math.sqrt(max(0.0, 1.0 - est ** 2) / max(shots - 1, 1))
    return est, sigma


#: Witness combination: coefficient of each stabilizer expectation in 2W - 4I.
WITNESS_COEFFS = {
    "Z_A Z_B": -1.0,
    "Z_A x_A x_B": -1.0,
    "X_A X_B z_A": +1.0,
    "z_A z_B": +1.0,
    "Z_B x_A x_B": -1.0,
    "X_A X_B z_B": -1.0,
}


@dataclass(frozen=True)
class WitnessReport:
    expectations: dict[str, tuple[float, float]]
    w: float
    w_sigma: float
    fidelity_bound: float
    bound_sigma: float

    def __post_init__(self):
        for name, (value, _) in self.expectations.items():
            if not -1.0 - 1e-9 <= value <= 1.0 + 1e-9:
                raise ValueError(f"expectation {name} out of [-1, 1]: {value}")
        if abs(self.fidelity_bound - (1.0 - self.w) / 2.0) > 1e-12:
            raise ValueError("fidelity bound must equal (1 - W)/2")


def witness(expectations: dict[str, tuple[float, float]]) -> WitnessReport:
    """Combine the six stabilizer expectations into W and the fidelity bound."""
    missing = set(WITNESS_COEFFS) - set(expectations)
    if missing:
        raise ValueError(f"missing stabilizer expectations: {sorted(missing)}")
    w = 0.5 * (4.0 + sum(WITNESS_COEFFS[k] * expectations[k][0] for k in WITNESS_COEFFS))
    var = 0.25 * sum(expectations[k][1] ** 2 for k in WITNESS_COEFFS)
    sigma = math.sqrt(var)
    return WitnessReport(expectations=dict(expectations), w=w, w_sigma=sigma,
                         fidelity_bound=(1.0 - w) / 2.0, bound_sigma=sigma / 2.0)


def measure_witness(state: MixedState, shots: int, seed: int = 0,
                    sample: bool = True) -> WitnessReport:
    """Measure all six stabilizers and build the report."""
    expectations = {}
    for k, (name, spec) in enumerate(WITNESS_STABILIZERS.items()):
        e, s = measure_stabilizer(state, spec, shots, seed=seed + k, sample=sample)
        expectations[name] = (e, s)
    return witness(expectations)
