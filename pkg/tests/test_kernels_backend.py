"""Parity between the compiled kernels and the pure-python fallback."""

import os
import subprocess
import sys

import numpy as np

from fsmps import _kernels_py, kernels
from fsmps.linalg import RngStream


def random_psd(n, rng):
    a = rng.complex_normal((n, n))
    g = a @ a.conj().T
    return g / np.trace(g).real


def test_env_chain_parity():
    rng = RngStream(0)
    tensors = [rng.complex_normal((4, 3, 8)), rng.complex_normal((8, 3, 8)),
               rng.complex_normal((8, 3, 2))]
    g = random_psd(2, rng)
    fast = kernels.env_chain(tensors, g)
    ref = _kernels_py.env_chain(tensors, g)
    for a, b in zip(fast, ref):
        assert np.abs(a - b).max() < 1e-13 * max(1.0, np.abs(b).max())


def test_chol_logdet_parity():
    rng = RngStream(1)
    for n in (1, 2, 9, 27):
        g = random_psd(n, rng)
        a = kernels._chol_logdet(g)
        b = _kernels_py.chol_logdet(g)
        assert abs(a - b) < 1e-10 * max(1.0, abs(b))


def test_chol_logdet_failure_signal():
    indefinite = np.diag([1.0, -1.0]).astype(complex)
    assert np.isnan(_kernels_py.chol_logdet(indefinite))
    assert np.isnan(kernels._chol_logdet(indefinite))


def test_pure_python_fallback_selected_by_env():
    code = (
        "import fsmps.kernels as k; "
        "assert k.BACKEND == 'python', k.BACKEND; "
        "import numpy as np; "
        "from fsmps.linalg import RngStream; "
        "from fsmps.mps import bond_profile, sample_rmps, right_environments; "
        "p = bond_profile(6, 2, 4); "
        "envs = right_environments(sample_rmps(p, RngStream(3))); "
        "assert all(abs(np.trace(g).real - 1) < 1e-10 for g in envs.gammas)"
    )
    env = dict(os.environ, FSMPS_PURE_PYTHON="1")
    subprocess.run([sys.executable, "-c", code], check=True, env=env)


def test_sampler_statistics_backend_independent():
    """Both backends must target the same distribution (not bitwise equal).

    A short chain average from each backend agrees within Monte Carlo
    error; run in subprocesses so the import-time selection applies.
    """
    code = (
        "import numpy as np; "
        "from fsmps.mps import bond_profile; "
        "from fsmps.sampler import SamplerConfig, run_fs_sampler; "
        "p = bond_profile(6, 2, 4); "
        "cfg = SamplerConfig(profile=p, n_samples=400, burn_in_sweeps=200, "
        "thin_sweeps=3, seed=5, chains=1); "
        "res = run_fs_sampler(cfg); "
        "ent = np.array([s.entropies()[2] for s in res.samples]); "
        "print(repr(float(ent.mean())), repr(float(ent.std(ddof=1))))"
    )
    outs = {}
    for backend, env_extra in (("cython", {}), ("python",
                                                {"FSMPS_PURE_PYTHON": "1"})):
        env = dict(os.environ, **env_extra)
        proc = subprocess.run([sys.executable, "-c", code], check=True,
                              env=env, capture_output=True, text=True)
        mean, sd = map(float, proc.stdout.split())
        outs[backend] = (mean, sd)
    (m1, s1), (m2, s2) = outs["cython"], outs["python"]
    se = np.hypot(s1, s2) / np.sqrt(400 / 4)  # tau-inflated, conservative
    assert abs(m1 - m2) < 3 * se
