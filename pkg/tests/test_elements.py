import math
import time

import numpy as np
import pytest

from pathpol.detection import BLOCH_H, DetectorSpec, coincidence_probability
from pathpol.elements import (apply, apply_all, beam_splitter, jones_hwp,
                              phase_plate, spatial_swap, waveplate,
                              _apply_single_photon_matrix)
from pathpol.modes import Arm, ModeLabel, Pol, Spatial
from pathpol.states import StageError, TwoPhotonState, canonical_pair

from oracles import (evolve_by_permanent, random_two_photon_state,
                     random_unitary, state_to_index_amplitudes)

L = ModeLabel


def _two(m, n, c=1.0):
    return {canonical_pair(m, n): c}


def witness_pair(pol_a=Pol.H, pol_b=Pol.H):
    return _two(L(Arm.A, Spatial.ELL, pol_a), L(Arm.B, Spatial.R, pol_b))


def test_bs_diagonal_to_ell_prime():
    # |d>_A goes entirely to |ell'>_A; partner photon parked in arm B.
    spectator = L(Arm.B, Spatial.R, Pol.H)
    amps = {}
    for sp in (Spatial.ELL, Spatial.R):
        amps.update(_two(L(Arm.A, sp, Pol.H), spectator, 1 / math.sqrt(2)))
    s = apply(TwoPhotonState(amps), beam_splitter(Arm.A))
    (pair, c), = [kv for kv in s.amplitudes.items() if abs(kv[1]) > 1e-12]
    arm_a_label = pair[0] if pair[0].arm == Arm.A else pair[1]
    assert arm_a_label.spatial == Spatial.ELL_PRIME
    assert abs(abs(c) - 1.0) < 1e-12


def test_bs_antidiagonal_to_r_prime():
    spectator = L(Arm.B, Spatial.R, Pol.H)
    amps = {}
    amps.update(_two(L(Arm.A, Spatial.ELL, Pol.H), spectator, 1 / math.sqrt(2)))
    amps.update(_two(L(Arm.A, Spatial.R, Pol.H), spectator, -1 / math.sqrt(2)))
    s = apply(TwoPhotonState(amps), beam_splitter(Arm.A))
    (pair, c), = [kv for kv in s.amplitudes.items() if abs(kv[1]) > 1e-12]
    arm_a_label = pair[0] if pair[0].arm == Arm.A else pair[1]
    assert arm_a_label.spatial == Spatial.R_PRIME


def test_bs_unitary_and_self_inverse():
    bs = beam_splitter(Arm.A)
    u = bs.matrix
    assert np.allclose(u.conj().T @ u, np.eye(8), atol=1e-12)
    assert np.allclose(u @ u, np.eye(8), atol=1e-12)


def test_plate_stage_mismatch_rejected():
    s = TwoPhotonState(_two(L(Arm.A, Spatial.ELL_PRIME, Pol.H),
                            L(Arm.B, Spatial.R_PRIME, Pol.H)))
    with pytest.raises(StageError):
        apply(s, waveplate("HWP", 0.3, Spatial.R, Arm.A))  # input-mode plate, post-chip arm
    # The BS is bidirectional (its own inverse): post-chip arms flow back.
    back = apply(s, beam_splitter("both"))
    assert back.stage == "pre-chip"


def test_hwp_zero_flips_v_sign_only():
    hwp = waveplate("HWP", 0.0, Spatial.R, Arm.A)
    s_v = TwoPhotonState(_two(L(Arm.A, Spatial.R, Pol.V), L(Arm.B, Spatial.ELL, Pol.V)))
    out = apply(s_v, hwp)
    (_, c), = out.amplitudes.items()
    assert abs(c + 1.0) < 1e-12  # one V photon on r_A -> sign flip
    s_h = TwoPhotonState(_two(L(Arm.A, Spatial.R, Pol.H), L(Arm.B, Spatial.ELL, Pol.H)))
    out = apply(s_h, hwp)
    (_, c), = out.amplitudes.items()
    assert abs(c - 1.0) < 1e-12


def test_hwp45_swaps_h_and_v():
    hwp = waveplate("HWP", math.pi / 4, Spatial.ELL, Arm.A)
    s = TwoPhotonState(_two(L(Arm.A, Spatial.ELL, Pol.H), L(Arm.B, Spatial.R, Pol.H)))
    out = apply(s, hwp)
    (pair, c), = out.amplitudes.items()
    arm_a_label = pair[0] if pair[0].arm == Arm.A else pair[1]
    assert arm_a_label.pol == Pol.V
    assert abs(c - 1.0) < 1e-12


def test_hwp_zero_on_ra_flips_phi_minus_branch_only():
    # Branch |r_A ell_B> in polarization (HH - VV)/sqrt2 becomes (HH + VV)/sqrt2
    # while an |ell_A r_B> branch is untouched.
    def bell_branch(sp_a, sp_b, sign):
        return {
            canonical_pair(L(Arm.A, sp_a, Pol.H), L(Arm.B, sp_b, Pol.H)): 0.5,
            canonical_pair(L(Arm.A, sp_a, Pol.V), L(Arm.B, sp_b, Pol.V)): 0.5 * sign,
        }

    amps = {}
    amps.update(bell_branch(Spatial.R, Spatial.ELL, -1))   # phi-minus on r_A ell_B
    amps.update(bell_branch(Spatial.ELL, Spatial.R, -1))   # phi-minus on ell_A r_B
    s = apply(TwoPhotonState(amps), waveplate("HWP", 0.0, Spatial.R, Arm.A))
    want = {}
    want.update(bell_branch(Spatial.R, Spatial.ELL, +1))
    want.update(bell_branch(Spatial.ELL, Spatial.R, -1))
    for k, v in want.items():
        assert abs(s.amplitudes[k] - v) < 1e-12


def test_phase_plate_zero_is_identity():
    s = TwoPhotonState(witness_pair())
    out = apply(s, phase_plate(Spatial.ELL, Arm.B, 0.0))
    assert out.amplitudes == s.amplitudes


def test_phase_plate_pi_theta_plus_to_theta_minus():
    # Path factor (|ell_A r_B> + |r_A ell_B>)/sqrt2 -> (|ell_A r_B> - |r_A ell_B>)/sqrt2
    # under a pi phase on ell_B, up to global phase.  Oracle: dense 16-dim
    # single-photon matrix application via the permanent evolution.
    amps = {}
    amps.update(_two(L(Arm.A, Spatial.ELL, Pol.H), L(Arm.B, Spatial.R, Pol.H), 1 / math.sqrt(2)))
    amps.update(_two(L(Arm.A, Spatial.R, Pol.H), L(Arm.B, Spatial.ELL, Pol.H), 1 / math.sqrt(2)))
    s = TwoPhotonState(amps)
    plate = phase_plate(Spatial.ELL, Arm.B, math.pi)
    out = apply(s, plate)

    oracle = evolve_by_permanent(state_to_index_amplitudes(s), plate.single_photon_matrix())
    got = {k: v for k, v in state_to_index_amplitudes(out).items() if abs(v) > 1e-12}
    assert set(got) == set(oracle)
    for k in got:
        assert abs(got[k] - oracle[k]) < 1e-12

    a = out.amplitudes[canonical_pair(L(Arm.A, Spatial.ELL, Pol.H), L(Arm.B, Spatial.R, Pol.H))]
    b = out.amplitudes[canonical_pair(L(Arm.A, Spatial.R, Pol.H), L(Arm.B, Spatial.ELL, Pol.H))]
    assert abs(a / b + 1.0) < 1e-12


def test_two_pi_plates_compose_to_identity_up_to_phase():
    s = TwoPhotonState(witness_pair())
    plates = [phase_plate(Spatial.ELL, Arm.B, math.pi)] * 2
    out = apply_all(s, plates)
    ratio = None
    for k, v in s.amplitudes.items():
        r = out.amplitudes[k] / v
        ratio = r if ratio is None else ratio
        assert abs(r - ratio) < 1e-12
    assert abs(abs(ratio) - 1.0) < 1e-12


def test_apply_identity_is_identity():
    rng = np.random.default_rng(3)
    labels = [L(Arm.A, sp, p, t) for sp in (Spatial.ELL, Spatial.R)
              for p in Pol for t in (0, 1)]
    s = random_two_photon_state(rng, labels)
    out = apply(s, phase_plate(Spatial.ELL, Arm.A, 0.0))
    for k, v in s.amplitudes.items():
        assert abs(out.amplitudes[k] - v) < 1e-12


def test_hom_full_bunching():
    # Identical temporal labels, one photon per input of BS_A: no coincidence.
    s = TwoPhotonState(_two(L(Arm.A, Spatial.ELL, Pol.H), L(Arm.A, Spatial.R, Pol.H)))
    out = apply(s, beam_splitter(Arm.A))
    cross = canonical_pair(L(Arm.A, Spatial.ELL_PRIME, Pol.H), L(Arm.A, Spatial.R_PRIME, Pol.H))
    assert abs(out.amplitudes.get(cross, 0.0)) < 1e-12
    bunched = [canonical_pair(L(Arm.A, sp, Pol.H), L(Arm.A, sp, Pol.H))
               for sp in (Spatial.ELL_PRIME, Spatial.R_PRIME)]
    assert all(abs(abs(out.amplitudes[k]) - 1 / math.sqrt(2)) < 1e-12 for k in bunched)


def test_hom_distinguishable_limit():
    # Orthogonal temporal labels: coincidence probability 1/2.
    s = TwoPhotonState(_two(L(Arm.A, Spatial.ELL, Pol.H, 0), L(Arm.A, Spatial.R, Pol.H, 1)))
    out = apply(s, beam_splitter(Arm.A))
    p = coincidence_probability(
        out,
        DetectorSpec(Arm.A, Spatial.ELL_PRIME),
        DetectorSpec(Arm.A, Spatial.R_PRIME),
    )
    assert abs(p - 0.5) < 1e-12


def test_hom_matches_permanent_oracle():
    s = TwoPhotonState(_two(L(Arm.A, Spatial.ELL, Pol.H), L(Arm.A, Spatial.R, Pol.H)))
    bs = beam_splitter(Arm.A)
    got = state_to_index_amplitudes(apply(s, bs))
    want = evolve_by_permanent(state_to_index_amplitudes(s), bs.single_photon_matrix())
    for k, v in want.items():
        assert abs(got.get(k, 0.0) - v) < 1e-12


def test_spatial_swap_moves_amplitude():
    s = TwoPhotonState(_two(L(Arm.B, Spatial.ELL_PRIME, Pol.H),
                            L(Arm.A, Spatial.R_PRIME, Pol.V)))
    out = apply(s, spatial_swap(Arm.B, Spatial.ELL_PRIME, Spatial.R_PRIME))
    (pair,), = [list(out.amplitudes)]
    arm_b_label = pair[0] if pair[0].arm == Arm.B else pair[1]
    assert arm_b_label.spatial == Spatial.R_PRIME


def test_norm_preserved_under_random_sequences():
    rng = np.random.default_rng(11)
    labels = [L(Arm.A, sp, p, t) for sp in (Spatial.ELL, Spatial.R)
              for p in Pol for t in (0, 1)]
    s = random_two_photon_state(rng, labels)
    ops = [waveplate("HWP", 0.3, Spatial.ELL, Arm.A),
           waveplate("QWP", 1.1, Spatial.R, Arm.A),
           phase_plate(Spatial.R, Arm.A, 2.2),
           beam_splitter(Arm.A),
           phase_plate(Spatial.R_PRIME, Arm.A, 0.7)]
    out = apply_all(s, ops)
    assert abs(out.norm_squared() - 1.0) < 1e-10


def test_oracle_equivalence_1000_random_unitaries():
    """Acceptance criterion 1: dense evolution vs permanent formula,
    1000 random 8x8 single-arm unitaries, max error < 1e-12, < 10 s."""
    rng = np.random.default_rng(2024)
    labels = [L(Arm.A, sp, p, t) for sp in (Spatial.ELL, Spatial.R)
              for p in Pol for t in (0, 1)]
    idx = [lab.index() for lab in labels]
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        u8 = random_unitary(rng, 8)
        u32 = np.eye(32, dtype=complex)
        u32[np.ix_(idx, idx)] = u8
        s = random_two_photon_state(rng, labels)
        got = state_to_index_amplitudes(_apply_single_photon_matrix(s, u32))
        want = evolve_by_permanent(state_to_index_amplitudes(s), u32)
        keys = set(got) | set(want)
        worst = max(worst, max(abs(got.get(k, 0.0) - want.get(k, 0.0)) for k in keys))
    elapsed = time.perf_counter() - t0
    assert worst < 1e-12, f"max amplitude error {worst}"
    assert elapsed < 10.0, f"oracle sweep took {elapsed:.1f}s"
