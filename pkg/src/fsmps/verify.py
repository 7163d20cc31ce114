"""Verification suites behind `fsmps verify` and the acceptance tests.

Each check returns a CheckResult with the measured value and its
tolerance; a suite is a named list of checks.  Scales default to the
values used throughout the experiments but can be reduced from the CLI.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import measure, mps, param, sampler, spectra
from .linalg import RngStream, haar_unitary


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    comparison: str = "<="
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "value": float(self.value),
            "threshold": float(self.threshold),
            "comparison": self.comparison,
            "detail": {k: _plain(v) for k, v in self.detail.items()},
            "seconds": round(self.seconds, 3),
        }


def _plain(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        result = fn(*args, **kwargs)
        result.seconds = time.perf_counter() - t0
        return result
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# ---------------------------------------------------------------------------
# environment recurrence vs dense Schmidt oracle


@_timed
def check_env_vs_dense(n_cases: int = 50, seed: int = 101) -> CheckResult:
    """Gamma spectra must match dense Schmidt spectra at every cut."""
    rng = RngStream(seed)
    gen = rng.generator
    worst = 0.0
    for _ in range(n_cases):
        d = int(gen.integers(2, 4))
        n = int(gen.integers(2, 9 if d == 2 else 8))
        dmax = int(gen.integers(1, 9))
        profile = mps.bond_profile(n, d, dmax)
        state = mps.sample_rmps(profile, rng)
        envs = mps.right_environments(state)
        psi = mps.to_statevector(state)
        for cut in profile.cuts:
            dense = mps.schmidt_spectrum_dense(psi, cut, profile)
            lam = np.sort(np.linalg.eigvalsh(envs[cut]))[::-1]
            worst = max(worst, float(np.abs(dense[:len(lam)] - lam).max()))
            if len(dense) > len(lam):
                worst = max(worst, float(dense[len(lam):].max()))
    return CheckResult("env_vs_dense", worst <= 1e-10, worst, 1e-10,
                       detail={"cases": n_cases})


# ---------------------------------------------------------------------------
# metric determinant


@_timed
def check_metric_determinant(n_refs: int = 10, n_sites: int = 4,
                             bond_dim: int = 2, step: float = 1e-4,
                             seed: int = 202) -> CheckResult:
    """Pairwise log det Gram differences vs fs_log_weight differences."""
    profile = mps.bond_profile(n_sites, 2, bond_dim)
    rng = RngStream(seed)
    log_dets, log_weights = [], []
    cross_worst = 0.0
    slices = measure.gram_site_slices(profile)
    for _ in range(n_refs):
        state = mps.sample_rmps(profile, rng)
        gram = measure.metric_gram_numeric(state, step)
        sign, logdet = np.linalg.slogdet(gram)
        log_dets.append(logdet if sign > 0 else -np.inf)
        log_weights.append(
            measure.fs_log_weight(mps.right_environments(state), profile))
        for i in range(len(slices)):
            for j in range(i + 1, len(slices)):
                block = gram[slices[i], slices[j]]
                if block.size:
                    cross_worst = max(cross_worst, float(np.abs(block).max()))
    worst = 0.0
    for i in range(n_refs):
        for j in range(i + 1, n_refs):
            worst = max(worst, abs((log_dets[i] - log_dets[j])
                                   - (log_weights[i] - log_weights[j])))
    cross_ok = cross_worst < 10 * step**2
    return CheckResult("metric_determinant", worst <= 1e-3 and cross_ok,
                       worst, 1e-3,
                       detail={"cross_block_max": cross_worst,
                               "cross_block_threshold": 10 * step**2,
                               "n_refs": n_refs})


# ---------------------------------------------------------------------------
# jacobian


@_timed
def check_jacobian_pushforward(n_samples: int = 100_000,
                               seed: int = 303) -> CheckResult:
    """d=2, D=1: Haar-pushforward of x_hat matches the density x_hat J(x_hat).

    For a single qubit the radial density is sin(2s)/2 with CDF sin^2(s).
    """
    rng = RngStream(seed)
    angles = np.empty(n_samples)
    for k in range(n_samples):
        u = haar_unitary(2, rng)
        x = param.extract_coordinates(u, 2, 1)
        angles[k] = abs(x[0, 0])
    ks = spectra.ks_distance(angles, lambda s: np.sin(np.minimum(s, np.pi / 2))**2)
    return CheckResult("jacobian_pushforward", ks < 0.02, ks, 0.02,
                       detail={"n_samples": n_samples})


@_timed
def check_jacobian_first_order(seed: int = 304) -> CheckResult:
    """|J - first-order approximation| at coordinate norm 0.1."""
    rng = RngStream(seed)
    worst = 0.0
    for d, dim in [(2, 1), (2, 2), (3, 2)]:
        x = rng.complex_normal(((d - 1) * dim, dim))
        x *= 0.1 / np.linalg.norm(x)
        diff = abs(param.jacobian(x, d, dim)
                   - param.jacobian_first_order(x, d, dim))
        worst = max(worst, diff)
    return CheckResult("jacobian_first_order", worst < 1e-3, worst, 1e-3)


@_timed
def check_param_roundtrip(n_cases: int = 100, seed: int = 305) -> CheckResult:
    """extract_coordinates(exp_param(x)) = x inside the branch domain."""
    rng = RngStream(seed)
    worst = 0.0
    for d, dim in [(2, 2), (3, 2), (2, 4)]:
        for _ in range(n_cases):
            x = rng.complex_normal(((d - 1) * dim, dim))
            radius = param.singular_angles(x).max()
            x *= rng.uniform(0.05, 1.0) * (np.pi / 2 - 0.1) / radius
            back = param.extract_coordinates(param.exp_param(x), d, dim)
            worst = max(worst, float(np.abs(back - x).max()))
    return CheckResult("param_roundtrip", worst <= 1e-8, worst, 1e-8,
                       detail={"cases_per_shape": n_cases,
                               "shapes": ["(2,2)", "(3,2)", "(2,4)"]})


# ---------------------------------------------------------------------------
# resolution of identity


@_timed
def check_identity_resolution(n_sites: int, n_samples: int = 100_000,
                              ensemble: str = "fs-reweighted",
                              seed: int = 404,
                              bond_dim: int = 2) -> CheckResult:
    profile = mps.bond_profile(n_sites, 2, bond_dim)
    report = measure.identity_resolution_check(profile, ensemble, n_samples,
                                               RngStream(seed))
    return CheckResult(f"identity_resolution_n{n_sites}",
                       report.frobenius_rel_dev < 0.02,
                       report.frobenius_rel_dev, 0.02,
                       detail={"ensemble": ensemble,
                               "n_samples": n_samples,
                               "max_offdiag": report.max_offdiag,
                               "diag_spread": report.diag_spread,
                               "ess": report.effective_sample_size})


# ---------------------------------------------------------------------------
# sampler checks


@_timed
def check_detailed_balance(seed: int = 505) -> CheckResult:
    """Accepted log-alphas telescope to the total log-weight change."""
    profile = mps.bond_profile(6, 2, 4)
    rng = RngStream(seed)
    state = sampler.init_chain(profile, rng, 0.3)
    lw0 = state.log_weight
    total = 0.0
    for _ in range(200):
        for site in range(profile.n_sites, 0, -1):
            before = state.log_weight
            if sampler.propose_and_step(state, site):
                total += state.log_weight - before
    fresh = measure.fs_log_weight(state.environments(), profile)
    err = abs((fresh - lw0) - total)
    state.verify_cache_coherence()
    return CheckResult("detailed_balance_telescoping", err <= 1e-8, err, 1e-8,
                       detail={"sweeps": 200})


@_timed
def check_mh_vs_importance(n_mh: int = 8000, n_is: int = 100_000,
                           seed: int = 606, threads: int = 1) -> CheckResult:
    """Mean mid-cut entropy: MH chain vs self-normalized reweighting."""
    profile = mps.bond_profile(6, 2, 4)
    mid = profile.n_sites // 2

    config = sampler.SamplerConfig(profile=profile, n_samples=n_mh,
                                   thin_sweeps=4, seed=seed, chains=2)
    result = sampler.run_fs_sampler(config, threads=threads)
    ent = np.array([s.entropies()[mid - 1] for s in result.samples])
    ess = sum(
        len(chain.samples) / sampler.integrated_autocorr_time(
            np.array([s.entropies()[mid - 1] for s in chain.samples]))
        for chain in result.chains)
    mh_mean = float(ent.mean())
    mh_se = float(ent.std(ddof=1) / np.sqrt(ess))

    def observable(psi):
        return mps.entropy_from_spectrum(
            mps.schmidt_spectrum_dense(psi, mid, profile))

    est = measure.fs_expectation_reweighted(observable, profile, n_is,
                                            RngStream(seed + 1))
    combined = np.sqrt(mh_se**2 + est.standard_error**2)
    diff = abs(mh_mean - est.mean)
    passed = diff < 3 * combined and ess >= 2000
    return CheckResult("mh_vs_importance", passed, diff, 3 * combined,
                       detail={"mh_mean": mh_mean, "mh_se": mh_se,
                               "mh_ess": ess,
                               "is_mean": est.mean, "is_se": est.standard_error,
                               "is_ess": est.effective_sample_size})


def _profile_stats(entropies: np.ndarray, correlated: bool):
    """Per-cut mean and standard error; tau-corrected when correlated."""
    n, _ = entropies.shape
    mean = entropies.mean(axis=0)
    se = entropies.std(axis=0, ddof=1) / np.sqrt(n)
    if correlated:
        taus = np.array([sampler.integrated_autocorr_time(entropies[:, c])
                         for c in range(entropies.shape[1])])
        se = se * np.sqrt(np.maximum(taus, 1.0))
    return mean, se


def _mirror_z(mean: np.ndarray, se: np.ndarray) -> list[float]:
    n_cuts = len(mean)
    out = []
    for i in range(1, n_cuts // 2 + 1):
        j = n_cuts + 1 - i
        if j <= i:
            break
        z = abs(mean[i - 1] - mean[j - 1]) / np.sqrt(se[i - 1]**2 + se[j - 1]**2)
        out.append(float(z))
    return out


@_timed
def check_fig1_properties(n_samples: int = 200, seed: int = 707,
                          threads: int = 1) -> CheckResult:
    """Flip symmetry of FS, asymmetry of RMPS, central jump, FS dominance."""
    profile = mps.bond_profile(10, 2, 8)
    rng = RngStream(seed)
    rmps_ent = np.array([
        mps.entanglement_profile(mps.right_environments(
            mps.sample_rmps(profile, rng)))
        for _ in range(n_samples)])
    central_rng = RngStream(seed + 1)
    central_ent = np.array([
        mps.dense_entanglement_profile(
            mps.sample_central_gauge(profile, central_rng), profile)
        for _ in range(n_samples)])
    config = sampler.SamplerConfig(profile=profile, n_samples=n_samples,
                                   thin_sweeps=10, seed=seed + 2, chains=2)
    fs_ent = np.array([s.entropies()
                       for s in sampler.run_fs_sampler(config, threads).samples])

    fs_mean, fs_se = _profile_stats(fs_ent, correlated=True)
    rm_mean, rm_se = _profile_stats(rmps_ent, correlated=False)
    ce_mean, ce_se = _profile_stats(central_ent, correlated=False)

    fs_z = _mirror_z(fs_mean, fs_se)
    rm_z = _mirror_z(rm_mean, rm_se)
    center = (profile.n_sites + 1) // 2
    jump_se = np.sqrt(ce_se[center - 1]**2 + ce_se[center - 2]**2)
    jump_z = abs(ce_mean[center - 1] - ce_mean[center - 2]) / max(jump_se, 1e-300)
    mid = profile.n_sites // 2
    dom_se = np.sqrt(fs_se[mid - 1]**2 + rm_se[mid - 1]**2)
    dom_z = (fs_mean[mid - 1] - rm_mean[mid - 1]) / dom_se

    ok_a = max(fs_z) < 3.0
    ok_b = max(rm_z) > 3.0
    ok_c = jump_z > 3.0
    ok_d = dom_z > 3.0
    passed = ok_a and ok_b and ok_c and ok_d
    return CheckResult("fig1_properties", passed, max(fs_z), 3.0, "<",
                       detail={"fs_mirror_z": fs_z, "rmps_mirror_z": rm_z,
                               "central_jump_z": jump_z, "dominance_z": dom_z,
                               "fs_symmetric": ok_a, "rmps_asymmetric": ok_b,
                               "central_jump": ok_c, "fs_dominates": ok_d,
                               "fs_mean_profile": fs_mean,
                               "rmps_mean_profile": rm_mean,
                               "central_mean_profile": ce_mean})


# ---------------------------------------------------------------------------
# spectral laws


def most_equilibrated_cut(profile: mps.BondProfile) -> int:
    """Interior cut with the most recurrence steps from the right edge."""
    return min(profile.interior_cuts())


@_timed
def check_fig3_rmps(n_samples: int = 1000, seed: int = 808) -> CheckResult:
    """RMPS interior-cut spectrum vs Marchenko-Pastur at c = 1/d."""
    profile = mps.bond_profile(10, 3, 27)
    rng = RngStream(seed)
    envs = [mps.right_environments(mps.sample_rmps(profile, rng))
            for _ in range(n_samples)]
    cut = most_equilibrated_cut(profile)
    lam = spectra.scaled_cut_eigenvalues(envs, cut)
    c = 1.0 / profile.phys_dim
    ks = spectra.ks_distance(lam, lambda x: spectra.mp_cdf(x, c))
    return CheckResult("fig3_rmps_mp_law", ks <= 0.05, ks, 0.05,
                       detail={"cut": cut, "aspect_ratio": c,
                               "n_samples": n_samples})


@_timed
def check_fig3_fs(n_samples: int = 1000, seed: int = 809,
                  threads: int = 1) -> CheckResult:
    """FS interior-cut spectrum vs Marchenko-Pastur at c = 1/(2d-1)."""
    profile = mps.bond_profile(10, 3, 27)
    config = sampler.SamplerConfig(profile=profile, n_samples=n_samples,
                                   thin_sweeps=5, seed=seed, chains=4)
    result = sampler.run_fs_sampler(config, threads=threads)
    cut = profile.n_sites // 2
    lam = np.concatenate([s.spectra[cut - 1] for s in result.samples])
    lam = lam * profile.dims[cut]
    c = spectra.fs_aspect_ratio(profile.phys_dim)
    ks = spectra.ks_distance(lam, lambda x: spectra.mp_cdf(x, c))
    return CheckResult("fig3_fs_mp_law", ks <= 0.10, ks, 0.10,
                       detail={"cut": cut, "aspect_ratio": c,
                               "n_samples": n_samples})


@_timed
def check_stransform(order: int = 8) -> CheckResult:
    """Fixed point, roundtrip, and convergence of the transfer map."""
    worst_fp = 0.0
    for d in (2, 3, 5):
        s = spectra.mp_stransform(1.0 / d, order)
        moved = spectra.transfer_stransform(s, d)
        worst_fp = max(worst_fp, float(np.abs(np.array(moved.coeffs)
                                              - np.array(s.coeffs)).max()))
    worst_rt = 0.0
    rng = RngStream(42)
    for c in (0.5, 1 / 3, 0.2):
        m = spectra.MomentSeries(tuple(spectra.mp_moments(c, order)))
        rt = spectra.stransform_to_moments(spectra.moments_to_stransform(m))
        worst_rt = max(worst_rt, float(np.abs(np.array(rt.coeffs)
                                              - np.array(m.coeffs)).max()))
    for _ in range(3):
        coeffs = (1.0,) + tuple(rng.uniform(-0.5, 0.5, order - 1))
        s = spectra.STransform(coeffs)
        back = spectra.moments_to_stransform(spectra.stransform_to_moments(s))
        worst_rt = max(worst_rt, float(np.abs(np.array(back.coeffs)
                                              - np.array(coeffs)).max()))
    iterations = {}
    for d in (2, 3):
        target = np.array(spectra.mp_stransform(1.0 / d, order).coeffs)
        s = spectra.point_mass_stransform(order)
        steps = None
        for it in range(1, 61):
            s = spectra.transfer_stransform(s, d)
            if np.abs(np.array(s.coeffs) - target).max() < 1e-10:
                steps = it
                break
        iterations[d] = steps
    converged = all(v is not None for v in iterations.values())
    worst = max(worst_fp, worst_rt)
    return CheckResult("stransform_suite",
                       worst_fp <= 1e-12 and worst_rt <= 1e-12 and converged,
                       worst, 1e-12,
                       detail={"fixed_point_dev": worst_fp,
                               "roundtrip_dev": worst_rt,
                               "iterations_to_fixed_point":
                                   {str(k): v for k, v in iterations.items()}})


# ---------------------------------------------------------------------------
# suites


SUITES = {
    "identity": ["identity_n2", "identity_n3"],
    "metric": ["env_vs_dense", "metric_determinant"],
    "jacobian": ["param_roundtrip", "jacobian_pushforward",
                 "jacobian_first_order"],
    "sampler": ["detailed_balance", "mh_vs_importance", "fig1_properties"],
    "spectra": ["stransform", "fig3_rmps", "fig3_fs"],
}


def run_suite(suite: str, samples: float = 1.0, seed: int | None = None,
              threads: int = 1, n_sites: int | None = None,
              bond_dim: int | None = None) -> list[CheckResult]:
    """Run one named suite (or "all"); samples scales the Monte Carlo sizes.

    n_sites/bond_dim override the desk scales where they apply (the
    identity and metric checks).
    """

    def n(base: int, minimum: int = 100) -> int:
        return max(minimum, int(base * samples))

    kw = {} if seed is None else {"seed": seed}
    metric_kw = dict(kw)
    if n_sites is not None:
        metric_kw["n_sites"] = n_sites
    if bond_dim is not None:
        metric_kw["bond_dim"] = bond_dim
    identity_sizes = [n_sites] if n_sites is not None else [2, 3]
    identity_kw = dict(kw)
    if bond_dim is not None:
        identity_kw["bond_dim"] = bond_dim
    registry = {
        "identity_n2": lambda: check_identity_resolution(
            identity_sizes[0], n(100_000), **identity_kw),
        "identity_n3": lambda: check_identity_resolution(
            identity_sizes[-1], n(100_000), **identity_kw),
        "env_vs_dense": lambda: check_env_vs_dense(**kw),
        "metric_determinant": lambda: check_metric_determinant(**metric_kw),
        "param_roundtrip": lambda: check_param_roundtrip(**kw),
        "jacobian_pushforward": lambda: check_jacobian_pushforward(
            n(100_000), **kw),
        "jacobian_first_order": lambda: check_jacobian_first_order(**kw),
        "detailed_balance": lambda: check_detailed_balance(**kw),
        "mh_vs_importance": lambda: check_mh_vs_importance(
            n(8000, 500), n(100_000), threads=threads, **kw),
        "fig1_properties": lambda: check_fig1_properties(
            n(200, 50), threads=threads, **kw),
        "stransform": lambda: check_stransform(),
        "fig3_rmps": lambda: check_fig3_rmps(n(1000, 100), **kw),
        "fig3_fs": lambda: check_fig3_fs(n(1000, 100), threads=threads, **kw),
    }
    if suite == "all":
        names = [name for names in SUITES.values() for name in names]
    elif suite in SUITES:
        names = list(SUITES[suite])
    else:
        raise ValueError(f"unknown suite {suite!r}; choose from "
                         f"{sorted(SUITES)} or 'all'")
    if n_sites is not None and "identity_n3" in names:
        names.remove("identity_n3")  # a single size was requested
    return [registry[name]() for name in names]
