"""Two-qubit polarization tomography on a selected path pair.

Sixteen projective settings ({H,V,D,R} per photon), linear inversion from the
measured probabilities, then maximum-likelihood projection to the physical
cone via a Cholesky parameterization and a Poisson log-likelihood, optimized
with an analytic gradient (L-BFGS-B, gradient norm 1e-8 or 1e5 iterations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .detection import DetectorSpec, coincidence_probability
from .modes import Arm, Spatial
from .scans import record_rng
from .source import BRANCH_RA_LB
from .states import MixedState

BASIS_ORDER = ("HH", "HV", "VH", "VV")

_KETS = {
    "H": np.array([1.0, 0.0], dtype=complex),
    "V": np.array([0.0, 1.0], dtype=complex),
    "D": np.array([1.0, 1.0], dtype=complex) / math.sqrt(2),
    "A": np.array([1.0, -1.0], dtype=complex) / math.sqrt(2),
    "R": np.array([1.0, 1.0j], dtype=complex) / math.sqrt(2),
    "L": np.array([1.0, -1.0j], dtype=complex) / math.sqrt(2),
}

_BLOCH = {
    "H": (0.0, 0.0, 1.0), "V": (0.0, 0.0, -1.0),
    "D": (1.0, 0.0, 0.0), "A": (-1.0, 0.0, 0.0),
    "R": (0.0, 1.0, 0.0), "L": (0.0, -1.0, 0.0),
}

SETTING_LABELS = tuple((a, b) for a in "HVDR" for b in "HVDR")


def bell_state(kind: str) -> np.ndarray:
    s = 1 / math.sqrt(2)
    return {
        "phi_plus": np.array([s, 0, 0, s], dtype=complex),
        "phi_minus": np.array([s, 0, 0, -s], dtype=complex),
        "psi_plus": np.array([0, s, s, 0], dtype=complex),
        "psi_minus": np.array([0, s, -s, 0], dtype=complex),
    }[kind]


@dataclass(frozen=True)
class TomographySetting:
    projector_a: str
    projector_b: str
    branch: tuple[Spatial, Spatial] = BRANCH_RA_LB

    def __post_init__(self):
        for p in (self.projector_a, self.projector_b):
            if p not in _KETS:
                raise ValueError(f"unknown projector label {p!r}")

    def two_qubit_projector(self) -> np.ndarray:
        ka, kb = _KETS[self.projector_a], _KETS[self.projector_b]
        k = np.kron(ka, kb)
        return np.outer(k, k.conj())

    def detectors(self) -> tuple[DetectorSpec, DetectorSpec]:
        sp_a, sp_b = self.branch
        return (DetectorSpec(Arm.A, sp_a, _BLOCH[self.projector_a]),
                DetectorSpec(Arm.B, sp_b, _BLOCH[self.projector_b]))


def sixteen_settings(branch=BRANCH_RA_LB) -> tuple[TomographySetting, ...]:
    return tuple(TomographySetting(a, b, branch) for a, b in SETTING_LABELS)


@dataclass(frozen=True)
class TomographyRecord:
    setting: TomographySetting
    shots: int
    counts: float
    sampled: bool = True


@dataclass(frozen=True)
class DensityMatrix2Q:
    """4x4 density matrix in the fixed {HH, HV, VH, VV} basis."""

    elements: np.ndarray
    converged: bool = True
    grad_norm: float = 0.0
    iterations: int = 0
    message: str = ""
    total_counts: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.elements, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError("density matrix must be 4x4")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise ValueError("density matrix trace is not 1")
        if np.linalg.eigvalsh(m).min() < -1e-9:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "elements", m)


def simulate_counts(state: MixedState, settings, shots_per_setting: int, seed: int = 0,
                    sample: bool = True) -> list[TomographyRecord]:
    """Poisson counts with mean shots * coincidence probability per setting."""
    if shots_per_setting <= 0:
        raise ValueError("shots_per_setting must be positive")
    records = []
    for i, setting in enumerate(settings):
        p = coincidence_probability(state, *setting.detectors())
        mean = shots_per_setting * p
        counts = float(record_rng(seed, i).poisson(mean)) if sample else mean
        records.append(TomographyRecord(setting, shots_per_setting, counts, sample))
    return records


class IncompleteSettingsError(ValueError):
    pass


def _check_complete(records) -> None:
    labels = {(r.setting.projector_a, r.setting.projector_b) for r in records}
    missing = set(SETTING_LABELS) - labels
    if len(records) != 16 or missing:
        raise IncompleteSettingsError(
            f"need the 16 settings exactly once; missing {sorted(missing)}")


def _linear_inversion(probs: np.ndarray, projs: np.ndarray) -> np.ndarray:
    a = projs.transpose(0, 2, 1).reshape(16, 16)  # Tr(P rho) rows
    rho = np.linalg.solve(a, probs).reshape(4, 4)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


_LOWER = ((1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2))


def _t_matrix(t: np.ndarray) -> np.ndarray:
    m = np.zeros((4, 4), dtype=complex)
    m[np.diag_indices(4)] = t[:4]
    for k, (r, c) in enumerate(_LOWER):
        m[r, c] = t[4 + 2 * k] + 1j * t[5 + 2 * k]
    return m


def _t_params(m: np.ndarray) -> np.ndarray:
    t = np.zeros(16)
    t[:4] = np.real(np.diag(m))
    for k, (r, c) in enumerate(_LOWER):
        t[4 + 2 * k] = m[r, c].real
        t[5 + 2 * k] = m[r, c].imag
    return t


def _grad_to_params(g: np.ndarray) -> np.ndarray:
    out = np.zeros(16)
    out[:4] = 2.0 * np.real(np.diag(g))
    for k, (r, c) in enumerate(_LOWER):
        out[4 + 2 * k] = 2.0 * g[r, c].real
        out[5 + 2 * k] = 2.0 * g[r, c].imag
    return out


def reconstruct(records) -> DensityMatrix2Q:
    """Linear inversion followed by Cholesky-parameterized Poisson MLE."""
    _check_complete(records)
    order = {lab: i for i, lab in enumerate(SETTING_LABELS)}
    records = sorted(records, key=lambda r: order[(r.setting.projector_a,
                                                   r.setting.projector_b)])
    counts = np.array([r.counts for r in records], dtype=float)
    projs = np.stack([r.setting.two_qubit_projector() for r in records])

    # Counts normalization from the complete {H,V}^2 subset.
    hv = [i for i, r in enumerate(records)
          if r.setting.projector_a in "HV" and r.setting.projector_b in "HV"]
    n0 = counts[hv].sum()
    if n0 <= 0:
        raise ValueError("no counts in the H/V subset; cannot normalize")
    rho_lin = _linear_inversion(counts / n0, projs)

    # Physical starting point for the MLE.
    w, v = np.linalg.eigh(rho_lin)
    w = np.maximum(w, 1e-6)
    rho0 = (v * w) @ v.conj().T
    rho0 /= np.trace(rho0).real
    t0 = _t_params(np.linalg.cholesky(rho0).conj().T)  # upper-tri via T^dag T

    shots = np.array([r.shots for r in records], dtype=float)
    scale = n0 / shots  # expected branch counts per shot
    eps = 1e-12

    def nll_and_grad(t):
        tm = _t_matrix(t)
        a = tm.conj().T @ tm
        tau = np.trace(a).real
        q = np.real(np.einsum("kij,ji->k", projs, a))
        mu = shots * scale * np.maximum(q, 0.0) / tau + eps
        f = float(np.sum(mu - counts * np.log(mu)))
        g_mu = (1.0 - counts / mu) * shots * scale
        g_a = np.einsum("k,kij->ij", g_mu / tau, projs) \
            - np.eye(4) * float(np.sum(g_mu * q) / tau ** 2)
        grad = _grad_to_params(tm @ g_a)
        return f, grad

    res = scipy.optimize.minimize(
        nll_and_grad, t0, jac=True, method="L-BFGS-B",
        options={"maxiter": 100_000, "gtol": 1e-8, "ftol": 1e-14})
    tm = _t_matrix(res.x)
    a = tm.conj().T @ tm
    rho = a / np.trace(a).real
    rho = 0.5 * (rho + rho.conj().T)
    grad_norm = float(np.max(np.abs(res.jac)))
    converged = bool(res.success or grad_norm < 1e-6)
    return DensityMatrix2Q(rho, converged=converged, grad_norm=grad_norm,
                           iterations=int(res.nit), message=str(res.message),
                           total_counts=float(n0))


def fidelity(rho: DensityMatrix2Q | np.ndarray, target: np.ndarray) -> float:
    m = rho.elements if isinstance(rho, DensityMatrix2Q) else np.asarray(rho)
    psi = np.asarray(target, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return float(np.real(psi.conj() @ m @ psi))


def concurrence(rho: DensityMatrix2Q | np.ndarray) -> float:
    m = rho.elements if isinstance(rho, DensityMatrix2Q) else np.asarray(rho)
    yy = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]],
                  dtype=complex)
    r = m @ yy @ m.conj() @ yy
    lam = np.sqrt(np.abs(np.linalg.eigvals(r).real))
    lam = np.sort(lam)[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    d = np.asarray(a) - np.asarray(b)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(d))))


@dataclass(frozen=True)
class MonteCarloErrors:
    fidelity_mean: float
    fidelity_sigma: float
    concurrence_mean: float
    concurrence_sigma: float
    n_resamples: int


def monte_carlo_errors(records, target: np.ndarray, n_resamples: int = 200,
                       seed: int = 0) -> MonteCarloErrors:
    """Poisson-resample the counts and re-reconstruct to get error bars."""
    if n_resamples < 100:
        raise ValueError("n_resamples must be at least 100")
    fids, concs = [], []
    for k in range(n_resamples):
        rng = record_rng(seed, k)
        resampled = [TomographyRecord(r.setting, r.shots,
                                      float(rng.poisson(max(r.counts, 0.0))), True)
                     for r in records]
        rho = reconstruct(resampled)
        fids.append(fidelity(rho, target))
        concs.append(concurrence(rho))
    return MonteCarloErrors(float(np.mean(fids)), float(np.std(fids, ddof=1)),
                            float(np.mean(concs)), float(np.std(concs, ddof=1)),
                            n_resamples)
