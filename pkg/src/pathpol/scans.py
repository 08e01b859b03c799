"""Delay-line scan experiments: HOM dips, hyperentangled scans, path-only scans.

Count model per record: expected signal = shots * P * eta, where P is the
coincidence probability from the engine and eta the (optional) pair
efficiency; accidentals are a flat Poisson background accidental_rate *
duration with duration = shots / brightness.  Sampling uses a per-record
generator derived from (seed, record index), so records are reproducible and
order-independent.

Phase convention of the hyperentangled scan: the lab's glass-plate zero is
referenced to the dip condition, which shifts with the polarization phase;
a scan setting (phi, theta) drives the source path phase phi + theta.  This
makes the peak/dip classification depend exactly on the parity of
(phi + theta)/pi: even -> dip, odd -> peak.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.optimize

from .detection import DetectorSpec, coincidence_probability
from .elements import apply, beam_splitter
from .modes import Arm, ModeLabel, Pol, Spatial
from .source import (BRANCH_LA_RB, BRANCH_RA_LB, CompensationSetting,
                     EfficiencyTable, SourceConfig, apply_compensation,
                     emit_hyperentangled)
from .states import TwoPhotonState, canonical_pair
from .wavepacket import temporal_overlap


@dataclass(frozen=True)
class ScanSetting:
    phi: float
    theta: float
    delta_x_um: float
    detectors: tuple[DetectorSpec, DetectorSpec]


@dataclass(frozen=True)
class ExperimentRecord:
    setting: ScanSetting
    duration_s: float
    raw_counts: float
    accidentals: float
    normalized: float
    shots: int
    rate_scale: float = 1.0
    efficiency_asymmetric: bool = False
    sampled: bool = True

    def __post_init__(self):
        if self.raw_counts < 0:
            raise ValueError("raw_counts must be >= 0")
        if not 0.0 <= self.normalized <= 1.0:
            raise ValueError("normalized must be a probability")


@dataclass(frozen=True)
class ScanFit:
    baseline: float
    extremum: float
    center_um: float
    width_um: float
    amplitude: float
    amplitude_err: float
    width_err: float


@dataclass(frozen=True)
class ScanResult:
    records: tuple[ExperimentRecord, ...]
    fit: ScanFit
    visibility: float
    visibility_err: float
    kind: str  # "dip" or "peak"
    visibility_net: float | None = None
    label: str = ""

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0 + 1e-9:
            raise ValueError(f"visibility out of range: {self.visibility}")
        if not math.isfinite(self.fit.center_um):
            raise ValueError("fit center is not finite")


def record_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((int(seed), int(index))))


def _normalized(signal_counts: float, shots: int, rate_scale: float) -> float:
    return min(max(signal_counts / (shots * rate_scale), 0.0), 1.0)


def _make_record(setting, probability, cfg: SourceConfig, shots, rate_scale,
                 asymmetric, rng, sample, accidental_rate_hz=None) -> ExperimentRecord:
    duration = shots / cfg.brightness_pairs_hz
    acc_rate = cfg.accidental_rate_hz if accidental_rate_hz is None else accidental_rate_hz
    mean_signal = shots * probability * rate_scale
    mean_acc = acc_rate * duration
    if sample:
        raw = float(rng.poisson(mean_signal + mean_acc))
        acc = float(rng.poisson(mean_acc))
    else:
        raw = mean_signal + mean_acc
        acc = mean_acc
    return ExperimentRecord(
        setting=setting, duration_s=duration, raw_counts=raw, accidentals=acc,
        normalized=_normalized(raw - acc, shots, rate_scale), shots=shots,
        rate_scale=rate_scale, efficiency_asymmetric=asymmetric, sampled=sample)


def apply_efficiencies(record: ExperimentRecord, efficiencies: EfficiencyTable,
                       branch=None) -> ExperimentRecord:
    """Rescale a record's expected rates by the pair efficiency product.

    With `branch` given (a (spatial_A, spatial_B) pair) the factor is that
    branch's product; otherwise both interfering branches are averaged and
    the record is flagged when their products differ (path-asymmetric table).
    Post-selected `normalized` is unchanged by construction.
    """
    if branch is not None:
        scale, asym = efficiencies.pair(branch), False
    else:
        p1, p2 = efficiencies.pair(BRANCH_RA_LB), efficiencies.pair(BRANCH_LA_RB)
        scale, asym = 0.5 * (p1 + p2), abs(p1 - p2) > 1e-12
    signal = record.raw_counts - record.accidentals
    return replace(record,
                   raw_counts=signal * scale + record.accidentals,
                   rate_scale=record.rate_scale * scale,
                   efficiency_asymmetric=record.efficiency_asymmetric or asym)


# ---------------------------------------------------------------- fitting --

def _gauss_model(x, base, amp, center, width):
    return base * (1.0 + amp * np.exp(-((x - center) ** 2) / (2.0 * width ** 2)))


def fit_scan(delays, counts, label="") -> ScanFit:
    x = np.asarray(delays, dtype=float)
    y = np.asarray(counts, dtype=float)
    edge = max(1, len(y) // 8)
    base0 = float(np.mean(np.concatenate([y[:edge], y[-edge:]])))
    if base0 <= 0:
        base0 = max(float(np.mean(y)), 1e-9)
    i_ext = int(np.argmax(np.abs(y - base0)))
    amp0 = float(np.clip((y[i_ext] - base0) / base0, -1.0, 1.0))
    width0 = max((x.max() - x.min()) / 8.0, 1e-3)
    sigma = np.sqrt(np.maximum(y, 1.0))
    if len(x) < 5:
        raise ValueError("need at least 5 delay points to fit a scan")
    try:
        popt, pcov = scipy.optimize.curve_fit(
            _gauss_model, x, y, p0=[base0, amp0, x[i_ext], width0], sigma=sigma,
            absolute_sigma=True, maxfev=20000, xtol=1e-15, ftol=1e-15, gtol=1e-15,
            bounds=([0.0, -1.0, x.min(), 1e-6], [np.inf, 1.0, x.max(), np.inf]))
    except RuntimeError as exc:
        raise RuntimeError(f"scan fit failed for {label or 'scan'}: {exc}") from exc
    base, amp, center, width = popt
    errs = np.sqrt(np.maximum(np.diag(pcov), 0.0))
    return ScanFit(baseline=float(base), extremum=float(base * (1 + amp)),
                   center_um=float(center), width_um=float(width),
                   amplitude=float(amp), amplitude_err=float(errs[1]),
                   width_err=float(errs[3]))


def _result_from_records(records, label="", net_counts=None) -> ScanResult:
    delays = [r.setting.delta_x_um for r in records]
    fit = fit_scan(delays, [r.raw_counts for r in records], label)
    vis_net = None
    if net_counts is not None:
        fit_net = fit_scan(delays, net_counts, label + "(net)")
        vis_net = min(abs(fit_net.amplitude), 1.0)
    return ScanResult(records=tuple(records), fit=fit,
                      visibility=min(abs(fit.amplitude), 1.0),
                      visibility_err=fit.amplitude_err,
                      kind="dip" if fit.amplitude < 0 else "peak",
                      visibility_net=vis_net, label=label)


def _run_records(worker, n_records, max_workers=None):
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(worker, range(n_records)))
    return [worker(i) for i in range(n_records)]


# ------------------------------------------------------------------ scans --

def hom_input_state(arm: Arm, wavepacket) -> TwoPhotonState:
    """One photon in each input of the chosen BS, ell photon delayed."""
    overlap = temporal_overlap(wavepacket)
    r_lab = ModeLabel(arm, Spatial.R, Pol.H)
    amps = {}
    ell0 = ModeLabel(arm, Spatial.ELL, Pol.H, 0)
    amps[canonical_pair(ell0, r_lab)] = overlap
    ortho = math.sqrt(max(0.0, 1.0 - overlap ** 2))
    if ortho > 0:
        ell1 = ModeLabel(arm, Spatial.ELL, Pol.H, 1)
        amps[canonical_pair(ell1, r_lab)] = ortho
    return TwoPhotonState(amps)


def hom_scan(cfg: SourceConfig, bs_arm: Arm, delays, shots: int, *, seed: int = 0,
             sample: bool = True, use_efficiencies: bool = True,
             max_workers: int | None = None) -> ScanResult:
    """Hong-Ou-Mandel dip of one beam splitter, with accidental-corrected fit."""
    if not len(delays):
        raise ValueError("delay list is empty")
    if shots <= 0:
        raise ValueError("shots must be positive")
    eta = (cfg.efficiencies.mode(bs_arm, Spatial.ELL) *
           cfg.efficiencies.mode(bs_arm, Spatial.R)) if use_efficiencies else 1.0
    dets = (DetectorSpec(bs_arm, Spatial.ELL_PRIME), DetectorSpec(bs_arm, Spatial.R_PRIME))
    bs = beam_splitter(bs_arm)

    def worker(i):
        dx = delays[i]
        wp = cfg.wavepacket.with_delay(dx)
        state = apply(hom_input_state(bs_arm, wp), bs)
        p = coincidence_probability(state, *dets)
        setting = ScanSetting(phi=0.0, theta=0.0, delta_x_um=dx, detectors=dets)
        return _make_record(setting, p, cfg, shots, eta, False, record_rng(seed, i), sample)

    records = _run_records(worker, len(delays), max_workers)
    net = [r.raw_counts - r.accidentals for r in records]
    return _result_from_records(records, label=f"hom_bs_{bs_arm.name.lower()}", net_counts=net)


CROSS_DETECTORS = (DetectorSpec(Arm.A, Spatial.R_PRIME), DetectorSpec(Arm.B, Spatial.ELL_PRIME))

HE_SETTINGS = ((0.0, 0.0), (0.0, math.pi), (math.pi, 0.0), (math.pi, math.pi))


def he_expected_kind(phi: float, theta: float) -> str:
    """Dip iff (phi + theta)/pi is even."""
    parity = round((phi + theta) / math.pi) % 2
    return "dip" if parity == 0 else "peak"


def _scan_state(cfg: SourceConfig, dx: float, compensate: bool):
    wp = cfg.wavepacket.with_delay(dx)
    state = emit_hyperentangled(replace(cfg, wavepacket=wp))
    if compensate:
        state = apply_compensation(state, CompensationSetting.paper())
    return apply(state, beam_splitter("both"))


def _cross_scan(cfg, delays, shots, seed, sample, use_efficiencies, max_workers,
                label, phi_src, phi_setting, theta_setting, compensate):
    eta = 1.0
    asym = False
    if use_efficiencies:
        p1, p2 = cfg.efficiencies.pair(BRANCH_RA_LB), cfg.efficiencies.pair(BRANCH_LA_RB)
        eta, asym = 0.5 * (p1 + p2), abs(p1 - p2) > 1e-12
    run_cfg = replace(cfg, phi=phi_src)

    def worker(i):
        dx = delays[i]
        state = _scan_state(run_cfg, dx, compensate)
        p = coincidence_probability(state, *CROSS_DETECTORS)
        setting = ScanSetting(phi=phi_setting, theta=theta_setting, delta_x_um=dx,
                              detectors=CROSS_DETECTORS)
        return _make_record(setting, p, cfg, shots, eta, asym, record_rng(seed, i), sample)

    records = _run_records(worker, len(delays), max_workers)
    return _result_from_records(records, label=label)


def he_scan(cfg: SourceConfig, delays, shots: int, *, seed: int = 0, sample: bool = True,
            use_efficiencies: bool = True, v_path_dip: float | None = None,
            v_path_peak: float | None = None, max_workers: int | None = None):
    """The four (phi, theta) hyperentangled-state scans; detectors r'_A, ell'_B."""
    results = {}
    for k, (phi, theta) in enumerate(HE_SETTINGS):
        kind = he_expected_kind(phi, theta)
        v_override = v_path_dip if kind == "dip" else v_path_peak
        run_cfg = cfg if v_override is None else replace(cfg, v_path=v_override)
        run_cfg = replace(run_cfg, theta=theta)
        results[(phi, theta)] = _cross_scan(
            run_cfg, delays, shots, seed + k, sample, use_efficiencies, max_workers,
            label=f"he_phi{phi:.0f}_theta{theta:.0f}",
            phi_src=math.remainder(phi + theta, 2 * math.pi),
            phi_setting=phi, theta_setting=theta, compensate=True)
    return results


def path_scan(cfg: SourceConfig, phi: float, delays, shots: int, *, seed: int = 0,
              sample: bool = True, use_efficiencies: bool = True,
              max_workers: int | None = None) -> ScanResult:
    """Path-only interference with the polarization forced to |H_A H_B>."""
    run_cfg = replace(cfg, pol_product=True, theta=0.0)
    return _cross_scan(run_cfg, delays, shots, seed, sample, use_efficiencies,
                       max_workers, label=f"path_phi{phi:.2f}",
                       phi_src=phi, phi_setting=phi, theta_setting=0.0, compensate=False)
