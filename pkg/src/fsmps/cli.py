"""Experiment command line: sample ensembles, analyze outputs, run verification.

Outputs are reproducible: a fixed seed (and declared chain count) yields
byte-identical CSVs for any thread count.  Exit codes: 0 success,
1 verification failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import csv
import json
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass

import click
import numpy as np

from . import __version__, measure, mps, sampler, spectra, verify
from .kernels import BACKEND
from .linalg import RngStream

META_FORMAT_VERSION = 1

PROFILE_HEADER = ["ensemble", "sample", "cut", "entropy_bits", "entropy_frac"]
SPECTRUM_HEADER = ["ensemble", "sample", "cut", "index", "eigenvalue",
                   "scaled_eigenvalue"]
DIAGNOSTICS_HEADER = ["chain", "sweep", "log_weight", "accept_rate",
                      "step_size"]


@dataclass
class ExperimentConfig:
    ensemble: str = "rmps"
    n_sites: int = 10
    local_dim: int = 2
    bond_dim: int = 8
    samples: int = 200
    chains: int = 1
    burn_in_sweeps: int | None = None
    thin_sweeps: int = 5
    step_size: float = 0.1
    adapt: bool = True
    seed: int = 0
    out_dir: str = "."
    format: str = "csv"
    spectrum_cut: str = "mid"

    def validate(self) -> None:
        if self.ensemble not in ("rmps", "central", "fs"):
            raise click.UsageError(f"unknown ensemble {self.ensemble!r}")
        for name in ("n_sites", "local_dim", "bond_dim", "samples", "chains"):
            if int(getattr(self, name)) < 1:
                raise click.UsageError(f"{name} must be positive")
        if self.local_dim < 2:
            raise click.UsageError("local_dim must be >= 2")
        if self.format not in ("csv", "json"):
            raise click.UsageError(f"unknown format {self.format!r}")
        if self.ensemble == "fs":
            if self.thin_sweeps < 1:
                raise click.UsageError("thin_sweeps must be positive")
            if self.step_size <= 0:
                raise click.UsageError("step_size must be positive")
            if self.burn_in_sweeps is not None and self.burn_in_sweeps < 0:
                raise click.UsageError("burn_in_sweeps must be >= 0")
        if self.spectrum_cut not in ("mid", "all"):
            try:
                cut = int(self.spectrum_cut)
            except ValueError:
                raise click.UsageError(
                    "spectrum-cut must be 'mid', 'all', or a cut index")
            if not 1 <= cut <= self.n_sites - 1:
                raise click.UsageError(
                    f"spectrum-cut {cut} outside 1..{self.n_sites - 1}")

    def spectrum_cuts(self, profile: mps.BondProfile) -> list[int]:
        if self.spectrum_cut == "mid":
            return [max(1, profile.n_sites // 2)]
        if self.spectrum_cut == "all":
            return list(profile.cuts)
        return [int(self.spectrum_cut)]


def _fmt(value) -> str:
    """Shortest round-trip decimal for floats, plain str otherwise."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_table(path: str, header: list[str], rows, fmt: str) -> None:
    if fmt == "json":
        path = os.path.splitext(path)[0] + ".json"
        payload = {"columns": header,
                   "rows": [[_fmt(v) for v in row] for row in rows]}
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
        return
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _chain_share(n: int, chains: int) -> list[int]:
    base, extra = divmod(n, chains)
    return [base + (1 if c < extra else 0) for c in range(chains)]


def _independent_samples(config: ExperimentConfig, profile: mps.BondProfile,
                         chain_id: int, count: int) -> list[list[np.ndarray]]:
    """Per-sample spectra (one array per cut) for rmps/central draws."""
    rng = RngStream(config.seed, chain_id)
    out = []
    for _ in range(count):
        if config.ensemble == "rmps":
            envs = mps.right_environments(mps.sample_rmps(profile, rng))
            spectra_ = [np.sort(np.linalg.eigvalsh(g))[::-1]
                        for g in envs.gammas]
        else:
            psi = mps.sample_central_gauge(profile, rng)
            spectra_ = [
                mps.schmidt_spectrum_dense(psi, cut, profile)[:profile.dims[cut]]
                for cut in profile.cuts]
        out.append(spectra_)
    return out


def run_sample(config: ExperimentConfig, threads: int = 1) -> dict:
    """Execute cmd_sample; returns the run metadata dictionary."""
    config.validate()
    profile = mps.bond_profile(config.n_sites, config.local_dim,
                               config.bond_dim)
    t0 = time.perf_counter()
    diagnostics_rows = []
    if config.ensemble == "fs":
        sampler_config = sampler.SamplerConfig(
            profile=profile, n_samples=config.samples,
            burn_in_sweeps=config.burn_in_sweeps,
            thin_sweeps=config.thin_sweeps, sigma0=config.step_size,
            adapt=config.adapt, seed=config.seed, chains=config.chains)
        result = sampler.run_fs_sampler(sampler_config, threads=threads)
        spectra_per_sample = [s.spectra for s in result.samples]
        for chain in result.chains:
            for st in chain.sweep_stats:
                diagnostics_rows.append([st.chain, st.sweep_index,
                                         st.log_weight, st.accept_rate,
                                         st.sigma])
    else:
        shares = _chain_share(config.samples, config.chains)
        if threads > 1 and config.chains > 1:
            from concurrent.futures import ThreadPoolExecutor
            with ThreadPoolExecutor(max_workers=min(threads, config.chains)) as ex:
                futures = [ex.submit(_independent_samples, config, profile,
                                     c, shares[c])
                           for c in range(config.chains)]
                parts = [f.result() for f in futures]
        else:
            parts = [_independent_samples(config, profile, c, shares[c])
                     for c in range(config.chains)]
        spectra_per_sample = [rec for part in parts for rec in part]

    cap = np.log2(config.bond_dim)
    profile_rows = []
    for k, spectra_ in enumerate(spectra_per_sample):
        for cut in profile.cuts:
            bits = mps.entropy_from_spectrum(spectra_[cut - 1])
            frac = bits / cap if cap > 0 else 0.0
            profile_rows.append([config.ensemble, k, cut, bits, frac])

    spectrum_rows = []
    for k, spectra_ in enumerate(spectra_per_sample):
        for cut in config.spectrum_cuts(profile):
            lams = spectra_[cut - 1]
            scale = profile.dims[cut]
            for idx, lam in enumerate(lams):
                spectrum_rows.append([config.ensemble, k, cut, idx,
                                      float(lam), float(lam) * scale])

    os.makedirs(config.out_dir, exist_ok=True)
    _write_table(os.path.join(config.out_dir, "profile.csv"),
                 PROFILE_HEADER, profile_rows, config.format)
    _write_table(os.path.join(config.out_dir, "spectrum.csv"),
                 SPECTRUM_HEADER, spectrum_rows, config.format)
    if config.ensemble == "fs":
        _write_table(os.path.join(config.out_dir, "diagnostics.csv"),
                     DIAGNOSTICS_HEADER, diagnostics_rows, config.format)

    meta = {
        "format_version": META_FORMAT_VERSION,
        "command": "sample",
        "config": asdict(config),
        "seed": config.seed,
        "versions": {
            "fsmps": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "kernel_backend": BACKEND,
        "threads": threads,
        "wall_time_s": round(time.perf_counter() - t0, 6),
    }
    with open(os.path.join(config.out_dir, "run_meta.json"), "w",
              encoding="ascii") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return meta


def _read_csv(path: str, header: list[str]) -> list[dict]:
    try:
        fh = open(path, encoding="ascii", newline="")
    except OSError as exc:
        raise click.UsageError(f"cannot read {path}: {exc}")
    with fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise click.UsageError(f"{path}: empty file, expected header "
                                   f"{','.join(header)}")
        if first != header:
            raise click.UsageError(
                f"{path}: header {','.join(first)} does not match expected "
                f"{','.join(header)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise click.UsageError(
                    f"{path}: row {lineno} has {len(row)} fields, "
                    f"expected {len(header)}")
            rows.append(dict(zip(header, row)))
        if not rows:
            raise click.UsageError(f"{path}: no data rows")
    return rows


def _parse_float(row: dict, key: str, path: str, lineno: int) -> float:
    try:
        return float(row[key])
    except ValueError:
        raise click.UsageError(
            f"{path}: row {lineno}: cannot parse {key}={row[key]!r}")


def run_analyze(spectrum_path: str, c: float, profile_path: str | None = None,
                cut: int | None = None, n_bins: int = 60,
                out_path: str = "analysis.json") -> dict:
    """Execute cmd_analyze against the documented CSV schemas."""
    rows = _read_csv(spectrum_path, SPECTRUM_HEADER)
    by_cut: dict[int, list[float]] = {}
    for lineno, row in enumerate(rows, start=2):
        try:
            cut_val = int(row["cut"])
        except ValueError:
            raise click.UsageError(
                f"{spectrum_path}: row {lineno}: cannot parse cut={row['cut']!r}")
        _parse_float(row, "eigenvalue", spectrum_path, lineno)
        lam = _parse_float(row, "scaled_eigenvalue", spectrum_path, lineno)
        by_cut.setdefault(cut_val, []).append(lam)
    if cut is None:
        if len(by_cut) != 1:
            raise click.UsageError(
                f"{spectrum_path} contains cuts {sorted(by_cut)}; "
                "pass --cut to choose one")
        cut = next(iter(by_cut))
    if cut not in by_cut:
        raise click.UsageError(
            f"cut {cut} not present in {spectrum_path} (has {sorted(by_cut)})")
    lam = np.array(by_cut[cut])

    ks = spectra.ks_distance(lam, lambda x: spectra.mp_cdf(x, c))
    lo, hi = spectra.mp_support(c)
    edges = np.linspace(0.0, max(hi, float(lam.max())) * 1.02, n_bins + 1)
    counts, _ = np.histogram(lam, bins=edges, density=True)
    emp_moments = [float(np.mean(lam**k)) for k in range(1, 5)]
    ref_moments = [float(m) for m in spectra.mp_moments(c, 4)]

    analysis = {
        "spectrum": spectrum_path,
        "cut": cut,
        "n_eigenvalues": int(lam.size),
        "law": "mp",
        "aspect_ratio": c,
        "ks_distance": float(ks),
        "support": [lo, hi],
        "histogram": {"edges": edges.tolist(), "density": counts.tolist()},
        "moments": {"empirical": emp_moments, "reference": ref_moments},
    }

    if profile_path is not None:
        prows = _read_csv(profile_path, PROFILE_HEADER)
        by_sample_cut: dict[int, dict[int, float]] = {}
        n_cuts = 0
        for lineno, row in enumerate(prows, start=2):
            try:
                k = int(row["sample"])
                cut_val = int(row["cut"])
            except ValueError:
                raise click.UsageError(
                    f"{profile_path}: row {lineno}: bad sample/cut field")
            bits = _parse_float(row, "entropy_bits", profile_path, lineno)
            by_sample_cut.setdefault(k, {})[cut_val] = bits
            n_cuts = max(n_cuts, cut_val)
        table = np.full((len(by_sample_cut), n_cuts), np.nan)
        for i, k in enumerate(sorted(by_sample_cut)):
            for cut_val, bits in by_sample_cut[k].items():
                table[i, cut_val - 1] = bits
        mean = np.nanmean(table, axis=0)
        se = np.nanstd(table, axis=0, ddof=1) / np.sqrt(table.shape[0])
        flip = []
        for i in range(1, n_cuts // 2 + 1):
            j = n_cuts + 1 - i
            if j <= i:
                break
            z = abs(mean[i - 1] - mean[j - 1]) / float(
                np.sqrt(se[i - 1]**2 + se[j - 1]**2))
            flip.append({"cuts": [i, j], "z": float(z)})
        analysis["flip_symmetry_z"] = flip
        analysis["mean_profile"] = [float(v) for v in mean]

    with open(out_path, "w", encoding="ascii") as fh:
        json.dump(analysis, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return analysis


# ---------------------------------------------------------------------------
# click wiring


@click.group()
@click.version_option(__version__)
def main():
    """Random MPS ensembles: sampling, analysis, verification."""


def _load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise click.UsageError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"config {path} is not valid JSON: {exc}")
    allowed = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(data) - allowed
    if unknown:
        raise click.UsageError(
            f"config {path} has unknown keys: {sorted(unknown)}")
    return data


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON file with ExperimentConfig fields; flags override it.")
@click.option("--ensemble", type=click.Choice(["rmps", "central", "fs"]),
              default=None)
@click.option("--n-sites", type=int, default=None)
@click.option("--local-dim", type=int, default=None)
@click.option("--bond-dim", type=int, default=None)
@click.option("--samples", type=int, default=None)
@click.option("--chains", type=int, default=None)
@click.option("--burn-in-sweeps", type=int, default=None)
@click.option("--thin-sweeps", type=int, default=None)
@click.option("--step-size", type=float, default=None)
@click.option("--adapt/--no-adapt", "adapt", default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out-dir", type=click.Path(), default=None)
@click.option("--format", "format_", type=click.Choice(["csv", "json"]),
              default=None)
@click.option("--spectrum-cut", type=str, default=None,
              help="'mid' (default), 'all', or a 1-based cut index.")
@click.option("--threads", type=int, default=None,
              help="Worker threads (default MPSM_THREADS or 1); does not "
                   "affect output bytes.")
def sample(config_path, threads, format_, **flags):
    """Draw an ensemble and write profile/spectrum/diagnostics tables."""
    merged = _load_config_file(config_path) if config_path else {}
    if format_ is not None:
        merged["format"] = format_
    for key, value in flags.items():
        if value is not None:
            merged[key] = value
    try:
        config = ExperimentConfig(**merged)
    except TypeError as exc:
        raise click.UsageError(str(exc))
    if threads is None:
        threads = int(os.environ.get("MPSM_THREADS", "1"))
    try:
        meta = run_sample(config, threads=threads)
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        sys.exit(3)
    click.echo(f"wrote {config.out_dir}/profile.csv, spectrum.csv"
               + (", diagnostics.csv" if config.ensemble == "fs" else "")
               + f" ({meta['wall_time_s']}s)")


@main.command()
@click.option("--spectrum", "spectrum_path", type=click.Path(), required=True)
@click.option("--profile", "profile_path", type=click.Path(), default=None)
@click.option("--law", type=click.Choice(["mp"]), default="mp")
@click.option("--c", "aspect_ratio", type=float, required=True,
              help="Marchenko-Pastur aspect ratio of the reference law.")
@click.option("--cut", type=int, default=None)
@click.option("--out", "out_path", type=click.Path(), default="analysis.json")
def analyze(spectrum_path, profile_path, law, aspect_ratio, cut, out_path):
    """Compare a spectrum table against a reference law; write analysis.json."""
    if not 0.0 < aspect_ratio <= 1.0:
        raise click.UsageError("--c must lie in (0, 1]")
    try:
        analysis = run_analyze(spectrum_path, aspect_ratio, profile_path, cut,
                               out_path=out_path)
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        sys.exit(3)
    click.echo(f"ks_distance = {analysis['ks_distance']:.4f} "
               f"(cut {analysis['cut']}, c = {aspect_ratio}); wrote {out_path}")


@main.command(name="verify")
@click.option("--suite", type=click.Choice(sorted(verify.SUITES) + ["all"]),
              default="all")
@click.option("--samples", type=float, default=1.0,
              help="Scale factor for Monte Carlo sample counts.")
@click.option("--n-sites", type=int, default=None,
              help="Override the chain length where the suite supports it.")
@click.option("--bond-dim", type=int, default=None,
              help="Override the bond dimension where the suite supports it.")
@click.option("--seed", type=int, default=None)
@click.option("--threads", type=int, default=None)
@click.option("--out", "out_path", type=click.Path(),
              default="verify_report.json")
def verify_cmd(suite, samples, n_sites, bond_dim, seed, threads, out_path):
    """Run a verification suite; exit 0 iff every check passes."""
    if threads is None:
        threads = int(os.environ.get("MPSM_THREADS", "1"))
    results = verify.run_suite(suite, samples=samples, seed=seed,
                               threads=threads, n_sites=n_sites,
                               bond_dim=bond_dim)
    report = {
        "suite": suite,
        "passed": all(r.passed for r in results),
        "checks": [r.as_dict() for r in results],
    }
    try:
        with open(out_path, "w", encoding="ascii") as fh:
            json.dump(report, fh, indent=1, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        sys.exit(3)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        click.echo(f"[{status}] {r.name}: value {r.value:.3e} "
                   f"{r.comparison} {r.threshold:.3e} ({r.seconds:.1f}s)")
    if not report["passed"]:
        sys.exit(1)


if __name__ == "__main__":
    main()
