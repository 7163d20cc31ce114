"""Fubini-Study weight, partition/identity estimators, and the metric oracle.

The sequential (RMPS) measure relates to the Fubini-Study volume form
through the bond-determinant weight: log w = sum_i w_i log det Gamma_i
with w_i = d D_{i-1} - D_i.  Everything statistical here reweights plain
RMPS draws by exp of that quantity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ResourceLimitError
from .linalg import RngStream, complete_isometry
from .mps import (BondProfile, Mps, RightEnvironments, right_environments,
                  sample_rmps, site_from_unitary, to_statevector)
from .param import exp_param


def log_weight_terms(envs: RightEnvironments, profile: BondProfile) -> np.ndarray:
    """Per-cut contributions w_i * log det Gamma_i, i = 1..N-1."""
    if envs.profile.dims != profile.dims:
        raise ValueError("environments do not match the bond profile")
    terms = np.zeros(profile.n_sites - 1)
    for cut in profile.cuts:
        if not profile.carries_weight(cut):
            continue
        terms[cut - 1] = profile.weights[cut - 1] * kernels.logdet_psd(envs[cut])
    return terms


def fs_log_weight(envs: RightEnvironments, profile: BondProfile) -> float:
    """log of the RMPS -> Fubini-Study correction factor (-inf if singular)."""
    return float(log_weight_terms(envs, profile).sum())


def log_weight_upper_bound(profile: BondProfile) -> float:
    """Maximum of fs_log_weight, attained at maximally mixed environments."""
    return float(sum(profile.weights[i - 1] * profile.dims[i]
                     * np.log(1.0 / profile.dims[i]) for i in profile.cuts))


# ---------------------------------------------------------------------------
# finite-difference metric oracle


def _site_unitaries(mps: Mps) -> list[np.ndarray]:
    """Deterministic unitary completion of every site isometry."""
    out = []
    for a in mps.sites:
        dl, d, dr = a.shape
        out.append(complete_isometry(a.transpose(1, 0, 2).reshape(d * dl, dr)))
    return out


def metric_gram_numeric(mps: Mps, step: float = 1e-4) -> np.ndarray:
    """Gram matrix of the coordinate tangent vectors at the given state.

    Central finite differences along every real/imaginary coordinate
    direction of every site, combined into Wirtinger derivatives
    (d/dRe - i d/dIm)/2 and projected orthogonal to the state.  The exact
    Gram is block diagonal with site blocks 1_{w_i} (x) Gamma_i^T, so its
    log-determinant realizes sum_i w_i log det Gamma_i up to O(step^2).
    """
    profile = mps.profile
    if not 1e-5 <= step <= 1e-3:
        raise ValueError(f"step {step} outside the supported [1e-5, 1e-3]")
    if profile.phys_dim**profile.n_sites > 2**12:
        raise ResourceLimitError("metric oracle is dense; reduce the chain")
    psi0 = to_statevector(mps)
    unitaries = _site_unitaries(mps)

    tangents = []
    for i in range(1, profile.n_sites + 1):
        rows, cols = profile.coord_shape(i)
        u0 = unitaries[i - 1]
        for r in range(rows):
            for c in range(cols):
                derivs = []
                for direction in (1.0, 1.0j):
                    shifted = []
                    for sign in (+1.0, -1.0):
                        x = np.zeros((rows, cols), dtype=np.complex128)
                        x[r, c] = sign * step * direction
                        u = exp_param(x, u0)
                        a = site_from_unitary(u, profile.dims[i - 1],
                                              profile.phys_dim, profile.dims[i])
                        perturbed = Mps(profile, mps.sites[:i - 1] + [a]
                                        + mps.sites[i:])
                        shifted.append(to_statevector(perturbed))
                    derivs.append((shifted[0] - shifted[1]) / (2 * step))
                vec = (derivs[0] - 1j * derivs[1]) / 2
                vec = vec - psi0 * (psi0.conj() @ vec)
                tangents.append(vec)
    basis = np.array(tangents)
    gram = basis.conj() @ basis.T
    return (gram + gram.conj().T) / 2


def gram_site_slices(profile: BondProfile) -> list[slice]:
    """Index ranges of each site's coordinate block in the metric Gram."""
    slices, start = [], 0
    for i in range(1, profile.n_sites + 1):
        rows, cols = profile.coord_shape(i)
        slices.append(slice(start, start + rows * cols))
        start += rows * cols
    return slices


# ---------------------------------------------------------------------------
# reweighted Monte Carlo estimators


@dataclass
class PartitionEstimate:
    z_hat: float
    standard_error: float
    n_samples: int


def partition_estimate(profile: BondProfile, n_samples: int,
                       rng: RngStream) -> PartitionEstimate:
    """Sample mean and error of exp(fs_log_weight) over RMPS draws."""
    if n_samples < 100:
        raise ValueError(f"need at least 100 samples, got {n_samples}")
    logs = np.empty(n_samples)
    for k in range(n_samples):
        envs = right_environments(sample_rmps(profile, rng))
        logs[k] = fs_log_weight(envs, profile)
    shift = logs.max()
    if not np.isfinite(shift):  # every draw singular: Z estimate is 0
        return PartitionEstimate(0.0, 0.0, n_samples)
    scaled = np.exp(logs - shift)
    mean = scaled.mean()
    se = scaled.std(ddof=1) / np.sqrt(n_samples) if n_samples > 1 else 0.0
    return PartitionEstimate(float(np.exp(shift) * mean),
                             float(np.exp(shift) * se), n_samples)


class _ShiftedAccumulator:
    """Compensated accumulation of w_k * X_k with w_k = exp(lw_k - shift).

    The shift tracks the running max of the log-weights so the scaled
    weights stay in [0, 1]; Kahan compensation keeps long sums accurate.
    """

    def __init__(self, shape):
        self.shift = -np.inf
        self.total = np.zeros(shape, dtype=np.complex128)
        self.comp = np.zeros(shape, dtype=np.complex128)
        self.weight_sum = 0.0
        self.weight_sq_sum = 0.0

    def add(self, log_weight: float, value: np.ndarray) -> None:
        if log_weight == -np.inf and self.shift == -np.inf:
            return
        if log_weight > self.shift:
            rescale = np.exp(self.shift - log_weight)
            self.total *= rescale
            self.comp *= rescale
            self.weight_sum *= rescale
            self.weight_sq_sum *= rescale**2
            self.shift = log_weight
        w = np.exp(log_weight - self.shift)
        y = w * value - self.comp
        t = self.total + y
        self.comp = (t - self.total) - y
        self.total = t
        self.weight_sum += w
        self.weight_sq_sum += w * w

    def mean(self) -> np.ndarray:
        if self.weight_sum == 0.0:
            raise ValueError("all weights vanished; nothing to average")
        return self.total / self.weight_sum

    def effective_sample_size(self) -> float:
        if self.weight_sq_sum == 0.0:
            return 0.0
        return self.weight_sum**2 / self.weight_sq_sum


@dataclass
class IdentityReport:
    frobenius_rel_dev: float
    max_offdiag: float
    diag_spread: float
    n_samples: int
    ensemble: str
    effective_sample_size: float


def identity_resolution_check(profile: BondProfile, ensemble: str,
                              n_samples: int, rng: RngStream) -> IdentityReport:
    """Monte Carlo E[|psi><psi|] against 1/d^N, optionally FS-reweighted.

    ensemble is "rmps" (unit weights) or "fs-reweighted" (self-normalized
    exp(fs_log_weight) importance weights).
    """
    if ensemble not in ("rmps", "fs-reweighted"):
        raise ValueError(f"unknown ensemble {ensemble!r}")
    dim = profile.phys_dim**profile.n_sites
    if dim > 2**10:
        raise ResourceLimitError(f"identity check accumulates a {dim}x{dim} matrix")
    acc = _ShiftedAccumulator((dim, dim))
    for _ in range(n_samples):
        mps = sample_rmps(profile, rng)
        if ensemble == "fs-reweighted":
            lw = fs_log_weight(right_environments(mps), profile)
        else:
            lw = 0.0
        psi = to_statevector(mps)
        acc.add(lw, np.outer(psi, psi.conj()))
    est = acc.mean()
    target = np.eye(dim) / dim
    dev = np.linalg.norm(est - target) / np.linalg.norm(target)
    offdiag = est - np.diag(np.diagonal(est))
    diag = np.diagonal(est).real
    return IdentityReport(float(dev), float(np.abs(offdiag).max()),
                          float(diag.max() - diag.min()), n_samples, ensemble,
                          float(acc.effective_sample_size()))


@dataclass
class ReweightedEstimate:
    mean: float
    standard_error: float
    effective_sample_size: float
    n_samples: int
    warnings: tuple[str, ...] = field(default_factory=tuple)


def fs_expectation_reweighted(observable, profile: BondProfile, n_samples: int,
                              rng: RngStream) -> ReweightedEstimate:
    """Self-normalized importance estimate of E_FS[f] from RMPS draws.

    observable maps a dense statevector to a real number.  The standard
    error is the delta-method one; an effective sample size below 10
    attaches a degenerate-weights warning rather than raising.
    """
    values = np.empty(n_samples)
    logs = np.empty(n_samples)
    for k in range(n_samples):
        mps = sample_rmps(profile, rng)
        logs[k] = fs_log_weight(right_environments(mps), profile)
        values[k] = observable(to_statevector(mps))
    shift = logs.max()
    if not np.isfinite(shift):
        raise ValueError("all importance weights vanished")
    w = np.exp(logs - shift)
    wsum = w.sum()
    mean = float((w * values).sum() / wsum)
    se = float(np.sqrt(np.sum(w**2 * (values - mean) ** 2)) / wsum)
    ess = float(wsum**2 / np.sum(w**2))
    notes = ()
    if ess < 10:
        notes = (f"degenerate weights: effective sample size {ess:.2f} < 10",)
    return ReweightedEstimate(mean, se, ess, n_samples, notes)
