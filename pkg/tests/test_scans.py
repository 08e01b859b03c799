import math
from dataclasses import replace

import numpy as np
import pytest

from pathpol import presets
from pathpol.modes import Arm, Spatial
from pathpol.scans import (apply_efficiencies, fit_scan, he_expected_kind,
                           he_scan, hom_scan, path_scan, record_rng)
from pathpol.source import (BRANCH_LA_RB, BRANCH_RA_LB, EfficiencyTable,
                            SourceConfig)

DELAYS = presets.DEFAULT_DELAYS_UM
IDEAL = SourceConfig(wavepacket=presets._wavepacket(overlap=1.0))


# ----------------------------------------------------------------- HOM ----

def test_ideal_hom_visibility_is_one():
    for arm in (Arm.A, Arm.B):
        res = hom_scan(IDEAL, arm, DELAYS, shots=10_000, sample=False)
        assert res.kind == "dip"
        assert res.visibility == pytest.approx(1.0, abs=1e-9)


def test_calibrated_hom_visibilities():
    for arm, v_raw, v_net in ((Arm.A, 0.976, 0.985), (Arm.B, 0.982, 0.991)):
        cfg = presets.hom_source(arm)
        res = hom_scan(cfg, arm, DELAYS, shots=presets.DEFAULT_SHOTS["hom"], seed=7)
        assert res.visibility == pytest.approx(v_raw, abs=0.01)
        assert res.visibility_net > res.visibility
        assert res.visibility_net == pytest.approx(v_net, abs=0.01)


def test_hom_empty_delays_rejected():
    with pytest.raises(ValueError):
        hom_scan(IDEAL, Arm.A, [], shots=10)


# ------------------------------------------------------------- HE scan ----

def test_he_parity_classification():
    assert he_expected_kind(0.0, 0.0) == "dip"
    assert he_expected_kind(math.pi, math.pi) == "dip"
    assert he_expected_kind(0.0, math.pi) == "peak"
    assert he_expected_kind(math.pi, 0.0) == "peak"


def test_ideal_he_scan_classification_and_visibility():
    results = he_scan(IDEAL, DELAYS, shots=10_000, sample=False)
    assert len(results) == 4
    for (phi, theta), res in results.items():
        assert res.kind == he_expected_kind(phi, theta), (phi, theta)
        assert res.visibility == pytest.approx(1.0, abs=1e-7)


def test_calibrated_he_scan_visibilities():
    cfg = presets.hescan_source()
    results = he_scan(cfg, DELAYS, shots=presets.DEFAULT_SHOTS["hescan"], seed=11,
                      v_path_dip=presets.HESCAN_V_PATH_DIP,
                      v_path_peak=presets.HESCAN_V_PATH_PEAK)
    for (phi, theta), res in results.items():
        want = he_expected_kind(phi, theta)
        assert res.kind == want
        if want == "dip":
            assert res.visibility == pytest.approx(0.860, abs=0.03)
        else:
            assert res.visibility == pytest.approx(0.93, abs=0.05)


# ----------------------------------------------------------- path scan ----

def test_ideal_path_scan_both_settings():
    ideal = replace(IDEAL, pol_product=True)
    dip = path_scan(ideal, 0.0, DELAYS, shots=10_000, sample=False)
    peak = path_scan(ideal, math.pi, DELAYS, shots=10_000, sample=False)
    assert dip.kind == "dip" and peak.kind == "peak"
    assert dip.visibility == pytest.approx(1.0, abs=1e-7)
    assert peak.visibility == pytest.approx(1.0, abs=1e-7)


def test_calibrated_path_scan():
    cfg = presets.pathscan_source()
    shots = presets.DEFAULT_SHOTS["pathscan"]
    dip = path_scan(replace(cfg, v_path=presets.PATHSCAN_V_PATH_DIP), 0.0,
                    DELAYS, shots=shots, seed=3)
    peak = path_scan(replace(cfg, v_path=presets.PATHSCAN_V_PATH_PEAK), math.pi,
                     DELAYS, shots=shots, seed=4)
    assert dip.visibility == pytest.approx(0.915, abs=0.03)
    assert peak.visibility == pytest.approx(0.892, abs=0.03)
    # SI width: sigma from the 10 nm filter gives a fitted width of 13.36 um.
    assert dip.fit.width_um == pytest.approx(13.2, abs=0.5)
    assert peak.fit.width_um == pytest.approx(13.2, abs=0.5)


# --------------------------------------------------------- efficiencies ----

def _expectation_record(cfg, arm=Arm.A):
    res = hom_scan(cfg, arm, [-30.0, -15.0, 0.0, 10.0, 20.0, 30.0], shots=1000,
                   sample=False, use_efficiencies=False)
    return res.records[-1]


def test_apply_efficiencies_identity_when_unity():
    rec = _expectation_record(IDEAL)
    eff = EfficiencyTable(ell_a=1.0, r_a=1.0, ell_b=1.0, r_b=1.0)
    out = apply_efficiencies(rec, eff, branch=BRANCH_RA_LB)
    assert out.raw_counts == pytest.approx(rec.raw_counts)
    assert out.rate_scale == pytest.approx(rec.rate_scale)
    assert not out.efficiency_asymmetric


def test_apply_efficiencies_pair_factor():
    rec = _expectation_record(IDEAL)
    out = apply_efficiencies(rec, EfficiencyTable(), branch=BRANCH_RA_LB)
    assert out.raw_counts / rec.raw_counts == pytest.approx(0.23 * 0.13)


def test_apply_efficiencies_normalized_invariant_and_flag():
    rec = _expectation_record(IDEAL)
    out = apply_efficiencies(rec, EfficiencyTable())  # both branches -> mean
    assert out.normalized == pytest.approx(rec.normalized, abs=1e-12)
    assert out.efficiency_asymmetric  # 0.23*0.13 != 0.22*0.18
    sym = EfficiencyTable(ell_a=0.5, r_a=0.5, ell_b=0.3, r_b=0.3)
    out2 = apply_efficiencies(rec, sym)
    assert not out2.efficiency_asymmetric
    assert out2.normalized == pytest.approx(rec.normalized, abs=1e-12)


# ----------------------------------------------------- statistics, misc ----

def test_sampled_counts_match_poisson_expectation():
    cfg = presets.hom_source(Arm.A)
    grid = [-40.0, -25.0, 0.0, 10.0, 25.0, 40.0]
    exact = hom_scan(cfg, Arm.A, grid, shots=5000, sample=False)
    mean_expected = exact.records[-1].raw_counts
    means = []
    for rep in range(100):
        res = hom_scan(cfg, Arm.A, grid, shots=5000, seed=1000 + rep)
        means.append(res.records[-1].raw_counts)
    emp = float(np.mean(means))
    sigma = math.sqrt(mean_expected / len(means))
    assert abs(emp - mean_expected) < 3 * sigma


def test_visibility_monotone_in_noise_parameters():
    base = presets.hescan_source()
    vis_by_v = []
    for v in (1.0, 0.9, 0.7):
        res = he_scan(replace(base, v_path=v), DELAYS, shots=1, sample=False)
        vis_by_v.append(res[(0.0, 0.0)].visibility)
    assert vis_by_v[0] >= vis_by_v[1] >= vis_by_v[2]
    # p_pol leaves the path interference contrast intact (noise factorizes
    # per DOF) and must never increase it.
    for p in (0.2, 0.6):
        res = he_scan(replace(base, p_pol=p), DELAYS, shots=1, sample=False)
        assert res[(0.0, 0.0)].visibility <= vis_by_v[0] + 1e-9


def test_records_reproducible_and_order_independent():
    cfg = presets.hom_source(Arm.A)
    a = hom_scan(cfg, Arm.A, DELAYS, shots=2000, seed=5)
    b = hom_scan(cfg, Arm.A, DELAYS, shots=2000, seed=5, max_workers=4)
    assert [r.raw_counts for r in a.records] == [r.raw_counts for r in b.records]
    c = hom_scan(cfg, Arm.A, DELAYS, shots=2000, seed=6)
    assert [r.raw_counts for r in a.records] != [r.raw_counts for r in c.records]


def test_record_rng_independent_of_order():
    assert record_rng(1, 2).integers(1 << 30) == record_rng(1, 2).integers(1 << 30)
    assert record_rng(1, 2).integers(1 << 30) != record_rng(1, 3).integers(1 << 30)


def test_fit_scan_recovers_known_parameters():
    x = np.linspace(-50, 50, 81)
    y = 200.0 * (1.0 - 0.8 * np.exp(-x ** 2 / (2 * 13.0 ** 2)))
    fit = fit_scan(x, y)
    assert fit.amplitude == pytest.approx(-0.8, abs=1e-6)
    assert fit.width_um == pytest.approx(13.0, abs=1e-6)
    assert fit.baseline == pytest.approx(200.0, rel=1e-6)
