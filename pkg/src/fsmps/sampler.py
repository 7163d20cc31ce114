"""Metropolis-Hastings sampler targeting the Fubini-Study MPS measure.

A chain state is the list of per-site Haar-frame unitaries plus cached
right environments and per-cut determinant terms.  A proposal at site j
left-multiplies U_j by exp(i sigma H) with H drawn GUE-style; by Haar
left-invariance the proposal is symmetric, so the acceptance ratio is the
weight ratio over the cuts strictly left of j (the only ones that move).
Sweeps run right to left so still-valid caches are reused.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InsufficientDataError
from .linalg import RngStream, anti_hermitian_exp, haar_unitary
from .mps import BondProfile, Mps, RightEnvironments, bond_profile, \
    entropy_from_spectrum, site_from_unitary

CHECKPOINT_FORMAT_VERSION = 1

ACCEPT_TARGET = 0.35
ADAPT_GAIN = 0.1


@dataclass
class SamplerConfig:
    profile: BondProfile
    n_samples: int
    burn_in_sweeps: int | None = None  # default 50 * N
    thin_sweeps: int = 5
    sigma0: float = 0.1
    adapt: bool = True
    seed: int = 0
    chains: int = 1

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.thin_sweeps < 1:
            raise ValueError("thin_sweeps must be >= 1")
        if self.sigma0 <= 0:
            raise ValueError("sigma0 must be positive")
        if self.chains < 1:
            raise ValueError("chains must be >= 1")
        if self.burn_in_sweeps is None:
            self.burn_in_sweeps = 50 * self.profile.n_sites
        if self.burn_in_sweeps < 0:
            raise ValueError("burn_in_sweeps must be >= 0")


class ChainState:
    """Mutable MH state: unitaries, cached environments, cached log terms."""

    def __init__(self, profile: BondProfile, unitaries: list[np.ndarray],
                 rng: RngStream, sigma: float):
        self.profile = profile
        self.unitaries = unitaries
        self.rng = rng
        self.sigma = float(sigma)
        self.accepted = np.zeros(profile.n_sites, dtype=np.int64)
        self.proposed = np.zeros(profile.n_sites, dtype=np.int64)
        self._rebuild_caches()

    # -- derived views --

    def site_tensor(self, site: int) -> np.ndarray:
        p = self.profile
        return site_from_unitary(self.unitaries[site - 1], p.dims[site - 1],
                                 p.phys_dim, p.dims[site])

    def mps(self) -> Mps:
        return Mps(self.profile, [self.site_tensor(i)
                                  for i in range(1, self.profile.n_sites + 1)])

    def environments(self) -> RightEnvironments:
        return RightEnvironments(self.profile, [g.copy() for g in self.gammas])

    @property
    def log_weight(self) -> float:
        return float(self.log_terms.sum())

    def _rebuild_caches(self) -> None:
        tensors = [self.site_tensor(i)
                   for i in range(2, self.profile.n_sites + 1)]
        self.gammas = kernels.env_chain(tensors, np.ones((1, 1),
                                                         dtype=np.complex128))
        self.log_terms = self._terms_for(self.gammas, self.profile.n_sites)

    def _terms_for(self, gammas, upto_site: int) -> np.ndarray:
        """w_i log det Gamma_i for cuts 1..upto_site-1 of a gamma list."""
        terms = np.zeros(upto_site - 1)
        for cut in range(1, upto_site):
            if self.profile.carries_weight(cut):
                terms[cut - 1] = self.profile.weights[cut - 1] \
                    * kernels.logdet_psd(gammas[cut - 1])
        return terms

    def verify_cache_coherence(self, tol: float = 1e-9) -> None:
        """Debug check: caches must equal a fresh recomputation."""
        fresh = ChainState(self.profile, self.unitaries, self.rng, self.sigma)
        for g_cached, g_fresh in zip(self.gammas, fresh.gammas):
            if np.abs(g_cached - g_fresh).max() > 1e-10:
                raise AssertionError("environment cache out of sync")
        if abs(self.log_weight - fresh.log_terms.sum()) > tol:
            raise AssertionError("log-weight cache out of sync")


def init_chain(profile: BondProfile, rng: RngStream,
               sigma0: float = 0.1) -> ChainState:
    """Fresh chain from an RMPS draw with caches populated."""
    unitaries = [haar_unitary(profile.site_unitary_dim(i), rng)
                 for i in range(1, profile.n_sites + 1)]
    return ChainState(profile, unitaries, rng, sigma0)


def _gue_antihermitian(n: int, rng: RngStream) -> np.ndarray:
    """i H with H GUE-normalized: independent entries of unit variance."""
    g = rng.complex_normal((n, n))
    h = (g + g.conj().T) / np.sqrt(2.0)
    return 1j * h


def propose_and_step(state: ChainState, site: int) -> bool:
    """One MH proposal at a site (1-based); mutates the state on accept."""
    profile = state.profile
    if not 1 <= site <= profile.n_sites:
        raise ValueError(f"site must be in 1..{profile.n_sites}, got {site}")
    state.proposed[site - 1] += 1
    n = profile.site_unitary_dim(site)
    kick = anti_hermitian_exp(state.sigma * _gue_antihermitian(n, state.rng))
    candidate = state.unitaries[site - 1] @ kick

    if site == 1:
        # no cut lies left of site 1: acceptance ratio is an empty product
        u = state.rng.uniform()
        if np.log(u) < 0.0:
            state.unitaries[0] = candidate
            state.accepted[0] += 1
            return True
        return False

    p = profile
    tensor = site_from_unitary(candidate, p.dims[site - 1], p.phys_dim,
                               p.dims[site])
    gamma_right = state.gammas[site - 1] if site <= p.n_sites - 1 \
        else np.ones((1, 1), dtype=np.complex128)
    left_tensors = [state.site_tensor(i) for i in range(2, site)] + [tensor]
    new_gammas = kernels.env_chain(left_tensors, gamma_right)
    new_terms = state._terms_for(new_gammas, site)
    old_terms = state.log_terms[:site - 1]
    log_alpha = float(new_terms.sum() - old_terms.sum())

    u = state.rng.uniform()
    if np.log(u) < log_alpha:
        state.unitaries[site - 1] = candidate
        state.gammas[:site - 1] = new_gammas
        state.log_terms[:site - 1] = new_terms
        state.accepted[site - 1] += 1
        return True
    return False


def sweep(state: ChainState) -> float:
    """One proposal per site, right to left; returns the acceptance rate."""
    n = state.profile.n_sites
    accepted = sum(propose_and_step(state, site) for site in range(n, 0, -1))
    return accepted / n


def constrained_sites(profile: BondProfile) -> np.ndarray:
    """Mask of sites whose proposals see a nontrivial acceptance ratio.

    A proposal at site j only touches cuts i < j, so sites left of the
    first weighted cut always accept; their rate carries no step-size
    information and is excluded from adaptation.
    """
    mask = np.zeros(profile.n_sites, dtype=bool)
    seen_weight = False
    for site in range(1, profile.n_sites + 1):
        mask[site - 1] = seen_weight
        if site < profile.n_sites and profile.carries_weight(site):
            seen_weight = True
    return mask


# ---------------------------------------------------------------------------
# chain diagnostics


@dataclass
class Diagnostics:
    autocorr_time: float
    ess: float
    stationarity_flag: bool
    split_z: float


def integrated_autocorr_time(trace: np.ndarray, window_factor: float = 5.0) -> float:
    """Sokal windowed estimate of the integrated autocorrelation time.

    A constant trace is reported, by convention, as fully correlated:
    tau = len(trace).
    """
    x = np.asarray(trace, dtype=float)
    n = len(x)
    x = x - x.mean()
    var = np.dot(x, x) / n
    if var == 0.0:
        return float(n)
    # FFT autocovariance
    m = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, m)
    acov = np.fft.irfft(f * np.conj(f), m)[:n].real / n
    rho = acov / acov[0]
    tau = 1.0
    for t in range(1, n):
        tau += 2.0 * rho[t]
        if t >= window_factor * tau:
            break
    return float(max(tau, 1.0))


def chain_diagnostics(log_weight_trace: np.ndarray) -> Diagnostics:
    """Autocorrelation time, ESS, and a split-trace stationarity flag."""
    x = np.asarray(log_weight_trace, dtype=float)
    if len(x) < 50:
        raise InsufficientDataError(
            f"need a trace of length >= 50, got {len(x)}")
    tau = integrated_autocorr_time(x)
    ess = len(x) / tau
    half = len(x) // 2
    a, b = x[:half], x[half:]
    if x.std() == 0.0:
        return Diagnostics(tau, ess, True, 0.0)
    tau_a = integrated_autocorr_time(a)
    tau_b = integrated_autocorr_time(b)
    se = np.sqrt(a.var(ddof=1) * tau_a / len(a) + b.var(ddof=1) * tau_b / len(b))
    z = abs(a.mean() - b.mean()) / se if se > 0 else np.inf
    return Diagnostics(tau, ess, bool(z < 3.0), float(z))


# ---------------------------------------------------------------------------
# sampler driver


@dataclass
class SampleRecord:
    """Per-sample summary: spectra of every Gamma plus the log weight."""

    chain: int
    sweep_index: int
    log_weight: float
    spectra: list[np.ndarray]

    def entropies(self, base: float = 2.0) -> np.ndarray:
        return np.array([entropy_from_spectrum(s, base) for s in self.spectra])


@dataclass
class SweepStat:
    chain: int
    sweep_index: int
    log_weight: float
    accept_rate: float
    sigma: float


@dataclass
class ChainResult:
    chain: int
    samples: list[SampleRecord]
    sweep_stats: list[SweepStat]
    final_sigma: float
    site_acceptance: np.ndarray
    diagnostics: Diagnostics | None


@dataclass
class SamplerResult:
    config: SamplerConfig
    chains: list[ChainResult]

    @property
    def samples(self) -> list[SampleRecord]:
        return [s for c in self.chains for s in c.samples]

    def log_weight_trace(self) -> np.ndarray:
        return np.array([s.log_weight for s in self.samples])


def record_sample(state: ChainState, chain_id: int = 0,
                  sweep_index: int = 0) -> SampleRecord:
    spectra = [np.sort(np.linalg.eigvalsh(g))[::-1] for g in state.gammas]
    return SampleRecord(chain_id, sweep_index, state.log_weight, spectra)


def run_chain(config: SamplerConfig, chain_id: int, n_samples: int,
              resume_from=None, checkpoint_path=None,
              checkpoint_every: int | None = None) -> ChainResult:
    """Burn in (with optional step-size adaptation), then sample.

    resume_from restores a checkpoint written by an identically configured
    run and continues it bit-identically; only the remaining samples are
    returned.  checkpoint_every counts measurement samples between
    checkpoint writes (the burn-in end is always written).
    """
    stats: list[SweepStat] = []
    if resume_from is not None:
        state, sweep_index, _ = load_checkpoint(resume_from)
        samples_done = max(0, (sweep_index - config.burn_in_sweeps)
                           // config.thin_sweeps)
    else:
        rng = RngStream(config.seed, chain_id)
        state = init_chain(config.profile, rng, config.sigma0)
        sweep_index = 0
        samples_done = 0

    def maybe_checkpoint():
        if checkpoint_path is not None:
            save_checkpoint(checkpoint_path, state, sweep_index,
                            {"chain": chain_id, "seed": config.seed})

    mask = constrained_sites(config.profile)
    for _ in range(config.burn_in_sweeps - sweep_index):
        before_acc = state.accepted.copy()
        acc = sweep(state)
        sweep_index += 1
        stats.append(SweepStat(chain_id, sweep_index, state.log_weight, acc,
                               state.sigma))
        if config.adapt and mask.any():
            # adapt on the sites that can actually reject; the others
            # always accept and would pin the sweep rate above target
            rate = (state.accepted - before_acc)[mask].sum() / mask.sum()
            state.sigma *= float(np.exp(ADAPT_GAIN * (rate - ACCEPT_TARGET)))
    # adaptation freezes here so measurement sweeps satisfy detailed balance
    if resume_from is None or sweep_index == config.burn_in_sweeps:
        maybe_checkpoint()
    samples: list[SampleRecord] = []
    while samples_done + len(samples) < n_samples:
        for _ in range(config.thin_sweeps):
            acc = sweep(state)
            sweep_index += 1
            stats.append(SweepStat(chain_id, sweep_index, state.log_weight,
                                   acc, state.sigma))
        samples.append(record_sample(state, chain_id, sweep_index))
        if checkpoint_every and len(samples) % checkpoint_every == 0:
            maybe_checkpoint()
    with np.errstate(invalid="ignore"):
        site_acc = np.where(state.proposed > 0, state.accepted
                            / np.maximum(state.proposed, 1), 0.0)
    diag = None
    if len(samples) >= 50:
        diag = chain_diagnostics(np.array([s.log_weight for s in samples]))
    return ChainResult(chain_id, samples, stats, state.sigma, site_acc, diag)


def _chain_share(n_samples: int, chains: int) -> list[int]:
    base, extra = divmod(n_samples, chains)
    return [base + (1 if c < extra else 0) for c in range(chains)]


def run_fs_sampler(config: SamplerConfig, threads: int = 1) -> SamplerResult:
    """Run the configured chains and aggregate in chain order.

    Every chain owns RngStream(seed, chain_id), so the result is
    bit-identical for any thread count.
    """
    shares = _chain_share(config.n_samples, config.chains)
    if threads > 1 and config.chains > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=min(threads, config.chains)) as ex:
            futures = [ex.submit(run_chain, config, c, shares[c])
                       for c in range(config.chains)]
            results = [f.result() for f in futures]
    else:
        results = [run_chain(config, c, shares[c]) for c in range(config.chains)]
    return SamplerResult(config, results)


# ---------------------------------------------------------------------------
# checkpointing


def _encode_array(a: np.ndarray) -> dict:
    buf = np.ascontiguousarray(a, dtype="<c16")
    return {"shape": list(a.shape),
            "data": base64.b64encode(buf.tobytes()).decode("ascii")}


def _decode_array(spec: dict) -> np.ndarray:
    raw = base64.b64decode(spec["data"])
    return np.frombuffer(raw, dtype="<c16").reshape(spec["shape"]).astype(
        np.complex128)


def save_checkpoint(path, state: ChainState, sweep_index: int,
                    config_snapshot: dict | None = None) -> None:
    """Write a JSON checkpoint from which a run resumes bit-identically."""
    payload = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "config": config_snapshot or {},
        "profile": {"n_sites": state.profile.n_sites,
                    "phys_dim": state.profile.phys_dim,
                    "max_bond": state.profile.max_bond},
        "sweep_index": int(sweep_index),
        "sigma": state.sigma,
        "rng_state": state.rng.state_dict(),
        "unitaries": [_encode_array(u) for u in state.unitaries],
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=1)


def load_checkpoint(path) -> tuple[ChainState, int, dict]:
    """Restore (state, sweep_index, config snapshot) from save_checkpoint."""
    with open(path, encoding="ascii") as fh:
        payload = json.load(fh)
    if payload["format_version"] != CHECKPOINT_FORMAT_VERSION:
        raise ValueError(
            f"unsupported checkpoint version {payload['format_version']}")
    profile = bond_profile(payload["profile"]["n_sites"],
                           payload["profile"]["phys_dim"],
                           payload["profile"]["max_bond"])
    rng = RngStream.from_state_dict(payload["rng_state"])
    unitaries = [_decode_array(spec) for spec in payload["unitaries"]]
    state = ChainState(profile, unitaries, rng, payload["sigma"])
    return state, payload["sweep_index"], payload["config"]
