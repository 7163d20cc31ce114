import numpy as np
import pytest

from fsmps import _kernels_py, kernels
from fsmps.errors import ContractViolationError, DegeneratePolarError
from fsmps.linalg import (RngStream, anti_hermitian_exp, complete_isometry,
                          haar_unitary, hermitian_eigensystem, log_det_psd,
                          polar_decompose)


def random_hermitian(n, rng):
    a = rng.complex_normal((n, n))
    return (a + a.conj().T) / 2


def random_psd(n, rng):
    a = rng.complex_normal((n, n))
    return a @ a.conj().T


class TestRngStream:
    def test_reproducible(self):
        a = RngStream(123, 4).standard_normal(10)
        b = RngStream(123, 4).standard_normal(10)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        a = RngStream(123, 0).standard_normal(10)
        b = RngStream(123, 1).standard_normal(10)
        assert not np.allclose(a, b)

    def test_state_roundtrip(self):
        rng = RngStream(9, 2)
        rng.standard_normal(17)
        restored = RngStream.from_state_dict(rng.state_dict())
        assert np.array_equal(rng.standard_normal(8), restored.standard_normal(8))


class TestHaarUnitary:
    def test_unitarity(self):
        rng = RngStream(0)
        for n in (1, 2, 5, 16):
            u = haar_unitary(n, rng)
            assert np.abs(u.conj().T @ u - np.eye(n)).max() < 1e-12

    def test_n1_is_phase(self):
        u = haar_unitary(1, RngStream(1))
        assert abs(abs(u[0, 0]) - 1) < 1e-12

    def test_invalid_dimension(self):
        with pytest.raises(ValueError):
            haar_unitary(0, RngStream(0))

    def test_entry_second_moment(self):
        # Haar symmetry forces E|U_ij|^2 = 1/n
        rng = RngStream(2)
        n, draws = 4, 10_000
        vals = np.array([abs(haar_unitary(n, rng)[0, 0])**2 for k in range(draws)])
        se = vals.std(ddof=1) / np.sqrt(draws)
        assert abs(vals.mean() - 1 / n) < 3 * se

    def test_left_invariance(self):
        # second moments of the first column of V U match those of U
        rng = RngStream(3)
        v = haar_unitary(6, rng)
        draws = 10_000
        a = np.empty(draws)
        b = np.empty(draws)
        for k in range(draws):
            u = haar_unitary(6, rng)
            a[k] = abs(u[0, 0])**2
            b[k] = abs((v @ u)[0, 0])**2
        se = np.sqrt(a.var(ddof=1) / draws + b.var(ddof=1) / draws)
        assert abs(a.mean() - b.mean()) < 3 * se


class TestHermitianEigensystem:
    def test_identity(self):
        w, v = hermitian_eigensystem(np.eye(3, dtype=complex))
        assert np.allclose(w, [1, 1, 1])

    def test_diagonal_sorted(self):
        w, _ = hermitian_eigensystem(np.diag([2.0, -1.0]).astype(complex))
        assert np.allclose(w, [-1, 2])

    def test_reconstruction(self):
        rng = RngStream(4)
        h = random_hermitian(7, rng)
        w, v = hermitian_eigensystem(h)
        rebuilt = (v * w) @ v.conj().T
        assert np.abs(rebuilt - h).max() < 1e-10 * max(1, np.abs(h).max())

    def test_rejects_non_hermitian(self):
        with pytest.raises(ContractViolationError):
            hermitian_eigensystem(np.array([[0, 1], [0, 0]], dtype=complex))


class TestLogDetPsd:
    def test_identity(self):
        assert log_det_psd(np.eye(4, dtype=complex)) == 0.0

    def test_diagonal(self):
        val = log_det_psd(np.diag([0.5, 0.5]).astype(complex))
        assert abs(val - 2 * np.log(0.5)) < 1e-12

    def test_matches_eigenvalue_product(self):
        rng = RngStream(5)
        g = random_psd(6, rng)
        w, _ = hermitian_eigensystem(g)
        assert abs(log_det_psd(g) - np.log(w).sum()) < 1e-10

    def test_singular_is_minus_inf(self):
        g = np.diag([1.0, 0.0]).astype(complex)
        assert log_det_psd(g) == -np.inf

    def test_indefinite_raises(self):
        with pytest.raises(ContractViolationError):
            log_det_psd(np.diag([1.0, -0.5]).astype(complex))

    def test_block_additivity(self):
        rng = RngStream(6)
        a, b = random_psd(3, rng), random_psd(4, rng)
        block = np.zeros((7, 7), dtype=complex)
        block[:3, :3], block[3:, 3:] = a, b
        assert abs(log_det_psd(block)
                   - log_det_psd(a) - log_det_psd(b)) < 1e-10


class TestPolarDecompose:
    def test_unitary_input(self):
        rng = RngStream(7)
        u = haar_unitary(4, rng)
        uc, w = polar_decompose(u)
        assert np.abs(uc - u).max() < 1e-10
        assert np.abs(w - np.eye(4)).max() < 1e-10

    def test_positive_scaling(self):
        uc, w = polar_decompose(2 * np.eye(2, dtype=complex))
        assert np.allclose(uc, np.eye(2))
        assert np.allclose(w, 4 * np.eye(2))

    def test_reconstruction(self):
        rng = RngStream(8)
        c = rng.complex_normal((6, 3))
        uc, w = polar_decompose(c)
        ew, ev = np.linalg.eigh(w)
        sqrt_w = (ev * np.sqrt(ew)) @ ev.conj().T
        assert np.abs(uc @ sqrt_w - c).max() < 1e-10
        assert np.abs(uc.conj().T @ uc - np.eye(3)).max() < 1e-10
        assert np.abs(w - c.conj().T @ c).max() < 1e-10

    def test_rank_deficient(self):
        c = np.zeros((4, 2), dtype=complex)
        c[0, 0] = 1.0
        with pytest.raises(DegeneratePolarError):
            polar_decompose(c)


class TestAntiHermitianExp:
    def test_zero(self):
        assert np.allclose(anti_hermitian_exp(np.zeros((3, 3))), np.eye(3))

    def test_rotation(self):
        th = 0.3
        k = np.array([[0, -th], [th, 0]], dtype=complex)
        expected = np.array([[np.cos(th), -np.sin(th)],
                             [np.sin(th), np.cos(th)]])
        assert np.abs(anti_hermitian_exp(k) - expected).max() < 1e-12

    def test_inverse(self):
        rng = RngStream(9)
        a = rng.complex_normal((5, 5))
        k = (a - a.conj().T) / 2
        prod = anti_hermitian_exp(k) @ anti_hermitian_exp(-k)
        assert np.abs(prod - np.eye(5)).max() < 1e-10

    def test_norm_preservation(self):
        rng = RngStream(10)
        a = rng.complex_normal((6, 6))
        k = (a - a.conj().T) / 2
        v = rng.complex_normal(6)
        assert abs(np.linalg.norm(anti_hermitian_exp(k) @ v)
                   - np.linalg.norm(v)) < 1e-12

    def test_rejects_hermitian(self):
        with pytest.raises(ContractViolationError):
            anti_hermitian_exp(np.eye(2, dtype=complex))


class TestKernels:
    def test_env_step_backends_agree(self):
        rng = RngStream(11)
        for dl, d, dr in [(1, 2, 2), (4, 2, 4), (5, 3, 2), (8, 3, 8)]:
            a = rng.complex_normal((dl, d, dr))
            g = random_psd(dr, rng)
            ref = _kernels_py.env_step(a, g)
            fast = kernels.env_step(a, g)
            assert np.abs(ref - fast).max() < 1e-12 * max(1, np.abs(ref).max())

    def test_env_chain_matches_steps(self):
        rng = RngStream(12)
        tensors = [rng.complex_normal((3, 2, 4)), rng.complex_normal((4, 2, 2))]
        g = random_psd(2, rng)
        chain = kernels.env_chain(tensors, g)
        g1 = kernels.env_step(tensors[1], g)
        g0 = kernels.env_step(tensors[0], g1)
        assert np.abs(chain[1] - g1).max() < 1e-14
        assert np.abs(chain[0] - g0).max() < 1e-14

    def test_logdet_psd_dispatch(self):
        rng = RngStream(13)
        g = random_psd(5, rng)
        w = np.linalg.eigvalsh(g)
        assert abs(kernels.logdet_psd(g) - np.log(w).sum()) < 1e-10
        singular = np.diag([1.0, 0.0]).astype(complex)
        assert kernels.logdet_psd(singular) == -np.inf


class TestCompleteIsometry:
    def test_completion_is_unitary(self):
        rng = RngStream(14)
        u = haar_unitary(6, rng)[:, :2]
        full = complete_isometry(u)
        assert np.abs(full.conj().T @ full - np.eye(6)).max() < 1e-12
        assert np.abs(full[:, :2] - u).max() == 0.0
