import numpy as np
import pytest

from fsmps.errors import ResourceLimitError
from fsmps.linalg import RngStream, haar_unitary
from fsmps.mps import (bond_profile, dense_entanglement_profile,
                       entanglement_profile, entropy_from_spectrum,
                       right_environments, sample_central_gauge, sample_rmps,
                       schmidt_spectrum_dense, to_statevector, Mps)


class TestBondProfile:
    def test_fig1_geometry(self):
        p = bond_profile(10, 2, 8)
        assert p.dims == (1, 2, 4, 8, 8, 8, 8, 8, 4, 2, 1)
        # saturated interior weight is D(d-1)
        assert p.weights[4] == 8

    def test_short_chain(self):
        p = bond_profile(3, 2, 8)
        assert p.dims == (1, 2, 2, 1)

    def test_weights_nonnegative(self):
        for n, d, dmax in [(1, 2, 1), (5, 3, 9), (12, 2, 64), (7, 4, 5)]:
            p = bond_profile(n, d, dmax)
            assert p.dims[0] == p.dims[-1] == 1
            assert all(w >= 0 for w in p.weights)
            assert all(p.dims[i] == min(d**i, d**(n - i), dmax)
                       for i in range(n + 1))

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            bond_profile(0, 2, 4)
        with pytest.raises(ValueError):
            bond_profile(4, 1, 4)
        with pytest.raises(ValueError):
            bond_profile(4, 2, 0)


class TestSampleRmps:
    def test_left_canonical(self):
        p = bond_profile(8, 2, 6)
        m = sample_rmps(p, RngStream(0))
        assert m.left_canonical_residual() < 1e-10

    def test_product_state_profile(self):
        p = bond_profile(5, 2, 1)
        m = sample_rmps(p, RngStream(1))
        envs = right_environments(m)
        for g in envs.gammas:
            assert g.shape == (1, 1)
            assert abs(g[0, 0] - 1) < 1e-12

    def test_profile_asymmetry(self):
        # the sequential ensemble is not flip symmetric: some mirrored
        # pair of cuts differs significantly
        p = bond_profile(10, 2, 8)
        rng = RngStream(2)
        ent = np.array([
            entanglement_profile(right_environments(sample_rmps(p, rng)))
            for _ in range(200)])
        mean = ent.mean(0)
        se = ent.std(0, ddof=1) / np.sqrt(len(ent))
        zs = [abs(mean[i - 1] - mean[9 - i]) / np.hypot(se[i - 1], se[9 - i])
              for i in range(1, 5)]
        assert max(zs) > 3


class TestRightEnvironments:
    def test_traces_are_one(self):
        p = bond_profile(9, 3, 7)
        envs = right_environments(sample_rmps(p, RngStream(3)))
        for g in envs.gammas:
            assert abs(np.trace(g).real - 1) < 1e-10
            assert np.abs(g - g.conj().T).max() < 1e-10

    def test_rank_bound(self):
        p = bond_profile(8, 2, 5)
        envs = right_environments(sample_rmps(p, RngStream(4)))
        for cut in p.cuts:
            w = np.linalg.eigvalsh(envs[cut])
            assert (w > 1e-12).sum() <= min(2**cut, 2**(8 - cut), 5)
            assert w.min() > -1e-10

    def test_matches_dense_schmidt(self):
        for seed, (n, d, dmax) in enumerate([(6, 2, 4), (8, 2, 8), (5, 3, 6)]):
            p = bond_profile(n, d, dmax)
            m = sample_rmps(p, RngStream(seed))
            envs = right_environments(m)
            psi = to_statevector(m)
            for cut in p.cuts:
                dense = schmidt_spectrum_dense(psi, cut, p)
                lam = np.sort(np.linalg.eigvalsh(envs[cut]))[::-1]
                assert np.abs(dense[:len(lam)] - lam).max() < 1e-10
                if len(dense) > len(lam):
                    assert dense[len(lam):].max() < 1e-10


class TestToStatevector:
    def test_single_site(self):
        p = bond_profile(1, 2, 1)
        m = sample_rmps(p, RngStream(5))
        psi = to_statevector(m)
        assert np.abs(psi - m.sites[0][0, :, 0]).max() < 1e-14

    def test_product_state_structure(self):
        p = bond_profile(3, 2, 1)
        m = sample_rmps(p, RngStream(6))
        psi = to_statevector(m)
        kron = np.kron(np.kron(m.sites[0][0, :, 0], m.sites[1][0, :, 0]),
                       m.sites[2][0, :, 0])
        assert np.abs(psi - kron).max() < 1e-12

    def test_norm(self):
        p = bond_profile(6, 2, 4)
        psi = to_statevector(sample_rmps(p, RngStream(7)))
        assert abs(np.linalg.norm(psi) - 1) < 1e-10

    def test_guard(self):
        p = bond_profile(30, 2, 2)
        m = Mps(p, [np.zeros((p.dims[i], 2, p.dims[i + 1]), dtype=complex)
                    for i in range(30)])
        with pytest.raises(ResourceLimitError):
            to_statevector(m)

    def test_gauge_invariance(self):
        # A_i -> A_i X, A_{i+1} -> X† A_{i+1} leaves the state unchanged
        p = bond_profile(5, 2, 4)
        m = sample_rmps(p, RngStream(8))
        x = haar_unitary(p.dims[2], RngStream(9))
        sites = [a.copy() for a in m.sites]
        sites[1] = np.einsum("anb,bc->anc", sites[1], x)
        sites[2] = np.einsum("ab,bnc->anc", x.conj().T, sites[2])
        psi0 = to_statevector(m)
        psi1 = to_statevector(Mps(p, sites))
        assert np.abs(psi0 - psi1).max() < 1e-10


class TestEntropies:
    def test_entropy_values(self):
        assert entropy_from_spectrum(np.array([0.5, 0.5])) == pytest.approx(1.0)
        assert entropy_from_spectrum(np.array([1.0, 0.0])) == 0.0
        assert entropy_from_spectrum(np.array([0.5, 0.25, 0.25])) \
            == pytest.approx(1.5)

    def test_profile_cap(self):
        p = bond_profile(6, 2, 4)
        envs = right_environments(sample_rmps(p, RngStream(10)))
        prof = entanglement_profile(envs)
        for cut, s in zip(p.cuts, prof):
            assert s <= np.log2(p.dims[cut]) + 1e-12

    def test_natural_base(self):
        lam = np.array([0.5, 0.25, 0.25])
        assert entropy_from_spectrum(lam, base=np.e) \
            == pytest.approx(1.5 * np.log(2))


class TestSchmidtSpectrumDense:
    def test_bell_pair(self):
        p = bond_profile(2, 2, 2)
        bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        lam = schmidt_spectrum_dense(bell, 1, p)
        assert np.allclose(lam, [0.5, 0.5])

    def test_product(self):
        p = bond_profile(2, 2, 2)
        prod = np.array([1, 0, 0, 0], dtype=complex)
        lam = schmidt_spectrum_dense(prod, 1, p)
        assert np.allclose(lam, [1.0, 0.0])

    def test_bad_cut(self):
        p = bond_profile(2, 2, 2)
        with pytest.raises(ValueError):
            schmidt_spectrum_dense(np.ones(4) / 2, 2, p)


class TestCentralGauge:
    def test_normalized(self):
        p = bond_profile(6, 2, 4)
        psi = sample_central_gauge(p, RngStream(11))
        assert abs(np.linalg.norm(psi) - 1) < 1e-10

    def test_product_profile(self):
        p = bond_profile(4, 2, 1)
        psi = sample_central_gauge(p, RngStream(12))
        lam = schmidt_spectrum_dense(psi, 2, p)
        assert lam[0] == pytest.approx(1.0)

    def test_central_jump(self):
        # the center cut is exactly maximally mixed, its neighbors are not
        p = bond_profile(10, 2, 8)
        rng = RngStream(13)
        ent = np.array([dense_entanglement_profile(
            sample_central_gauge(p, rng), p) for _ in range(100)])
        mean = ent.mean(0)
        se = ent.std(0, ddof=1) / np.sqrt(len(ent))
        center = 5
        assert np.allclose(ent[:, center - 1], 3.0, atol=1e-8)
        z = (mean[center - 1] - mean[center - 2]) \
            / np.hypot(se[center - 1], se[center - 2])
        assert z > 3


class TestLocalUnitaryInvariance:
    def test_entropy_distribution_invariant(self):
        # applying a fixed physical unitary at one site must not change
        # the entanglement-profile distribution (two-sample KS)
        from fsmps.spectra import ks_distance
        p = bond_profile(6, 2, 4)
        v = haar_unitary(2, RngStream(14))
        rng_a, rng_b = RngStream(15), RngStream(16)
        mids_plain, mids_rotated = [], []
        for _ in range(400):
            m = sample_rmps(p, rng_a)
            mids_plain.append(entanglement_profile(right_environments(m))[2])
            m2 = sample_rmps(p, rng_b)
            sites = [a.copy() for a in m2.sites]
            sites[2] = np.einsum("nm,amb->anb", v, sites[2])
            mids_rotated.append(
                entanglement_profile(right_environments(Mps(p, sites)))[2])
        a = np.sort(mids_plain)

        def cdf(x):
            return np.searchsorted(a, x, side="right") / len(a)

        ks = ks_distance(np.array(mids_rotated), cdf)
        # two-sample KS 1% critical value ~ 1.63 * sqrt(2/n)
        assert ks < 1.63 * np.sqrt(2 / 400)
