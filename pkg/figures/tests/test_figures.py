import numpy as np
import pytest

from fsfigs import mp
from fsfigs.fig_cdf import main as cdf_main
from fsfigs.fig_profile import main as profile_main
from fsfigs.fig_spectrum import main as spectrum_main
from fsfigs.io import SchemaError, read_rows

PROFILE_HEADER = "ensemble,sample,cut,entropy_bits,entropy_frac\n"
SPECTRUM_HEADER = "ensemble,sample,cut,index,eigenvalue,scaled_eigenvalue\n"


def write_profile(path, ensembles=("rmps", "fs"), samples=30, cuts=5,
                  cap_bits=3.0, shift=0.0, seed=0):
    gen = np.random.default_rng(seed)
    lines = [PROFILE_HEADER]
    for ensemble in ensembles:
        offset = shift if ensemble == "fs" else 0.0
        for k in range(samples):
            for cut in range(1, cuts + 1):
                bits = np.clip(gen.normal(1.5 + offset, 0.3), 0.0, cap_bits)
                lines.append(f"{ensemble},{k},{cut},{float(bits)!r},"
                             f"{float(bits / cap_bits)!r}\n")
    path.write_text("".join(lines))


def write_spectrum(path, samples=50, dim=8, seed=1):
    gen = np.random.default_rng(seed)
    lines = [SPECTRUM_HEADER]
    for k in range(samples):
        lam = gen.dirichlet(np.ones(dim))
        for idx, v in enumerate(np.sort(lam)[::-1]):
            lines.append(f"rmps,{k},3,{idx},{float(v)!r},{float(v * dim)!r}\n")
    path.write_text("".join(lines))


class TestMpOverlay:
    @pytest.mark.parametrize("c", [1.0, 0.5, 1 / 3, 0.2])
    def test_normalization_check_passes(self, c):
        assert abs(mp.integral_mass(c) - 1) < 1e-6
        x, y = mp.overlay_curve(c)  # raises if its internal check fails
        assert len(x) == len(y)

    def test_density_outside_support(self):
        lo, hi = mp.support(0.5)
        assert mp.density(np.array([lo - 0.01, hi + 0.01]), 0.5).max() == 0.0


class TestFigProfile:
    def test_renders(self, tmp_path):
        csv = tmp_path / "profile.csv"
        write_profile(csv, ensembles=("rmps", "central", "fs"))
        out = tmp_path / "fig1.png"
        profile_main([str(csv), "--out", str(out)])
        assert out.stat().st_size > 0

    def test_cap_line_derived_from_frac(self, tmp_path):
        from fsfigs.fig_profile import collect_profiles
        csv = tmp_path / "profile.csv"
        write_profile(csv, cap_bits=3.0)
        _, cap = collect_profiles([str(csv)])
        assert cap == pytest.approx(3.0, rel=1e-9)

    def test_single_sample_no_crash(self, tmp_path):
        csv = tmp_path / "profile.csv"
        write_profile(csv, ensembles=("rmps",), samples=1)
        out = tmp_path / "fig.svg"
        profile_main([str(csv), "--out", str(out)])
        assert out.exists()

    def test_missing_column_named(self, tmp_path):
        csv = tmp_path / "profile.csv"
        csv.write_text("ensemble,sample,cut,entropy_frac\nrmps,0,1,0.5\n")
        with pytest.raises(SystemExit) as err:
            profile_main([str(csv), "--out", str(tmp_path / "x.png")])
        assert err.value.code == 2

    def test_multiple_inputs(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_profile(a, ensembles=("rmps",))
        write_profile(b, ensembles=("fs",), shift=0.4)
        out = tmp_path / "fig.png"
        profile_main([str(a), str(b), "--out", str(out)])
        assert out.exists()


class TestFigCdf:
    def test_renders_and_dominance_visible(self, tmp_path):
        from fsfigs.fig_cdf import collect_fractions
        csv = tmp_path / "profile.csv"
        write_profile(csv, shift=0.5)
        out = tmp_path / "cdf.png"
        cdf_main([str(csv), "--out", str(out)])
        assert out.exists()
        fracs = collect_fractions([str(csv)])
        # fs shifted up: its mean fraction dominates
        assert np.mean(fracs["fs"]) > np.mean(fracs["rmps"])

    def test_constant_entropy_step(self, tmp_path):
        csv = tmp_path / "profile.csv"
        lines = [PROFILE_HEADER]
        for k in range(10):
            lines.append(f"rmps,{k},1,1.5,0.5\n")
        csv.write_text("".join(lines))
        out = tmp_path / "cdf.png"
        cdf_main([str(csv), "--out", str(out)])
        assert out.exists()

    def test_empty_file_fails(self, tmp_path):
        csv = tmp_path / "profile.csv"
        csv.write_text(PROFILE_HEADER)
        with pytest.raises(SystemExit) as err:
            cdf_main([str(csv), "--out", str(tmp_path / "x.png")])
        assert err.value.code == 2


class TestFigSpectrum:
    def test_renders_with_overlays(self, tmp_path):
        csv = tmp_path / "spectrum.csv"
        write_spectrum(csv)
        out = tmp_path / "spec.png"
        spectrum_main([str(csv), "--out", str(out),
                       "--c", str(1 / 3), "--c", "0.2"])
        assert out.stat().st_size > 0

    def test_histogram_only(self, tmp_path):
        csv = tmp_path / "spectrum.csv"
        write_spectrum(csv)
        out = tmp_path / "spec.svg"
        spectrum_main([str(csv), "--out", str(out)])
        assert out.exists()

    def test_out_of_support_values_render(self, tmp_path):
        csv = tmp_path / "spectrum.csv"
        lines = [SPECTRUM_HEADER]
        for idx, v in enumerate([0.5, 4.5, 9.0]):
            lines.append(f"rmps,0,3,{idx},{float(v / 8)!r},{float(v)!r}\n")
        csv.write_text("".join(lines))
        out = tmp_path / "spec.png"
        spectrum_main([str(csv), "--out", str(out), "--c", "0.5"])
        assert out.exists()

    def test_idempotent_rerun(self, tmp_path):
        csv = tmp_path / "spectrum.csv"
        write_spectrum(csv)
        out = tmp_path / "spec.png"
        spectrum_main([str(csv), "--out", str(out)])
        first = out.stat().st_size
        spectrum_main([str(csv), "--out", str(out)])
        assert out.stat().st_size == first


class TestSchema:
    def test_read_rows_rejects_missing(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(SchemaError):
            read_rows(str(p), ("a", "b", "c"))
