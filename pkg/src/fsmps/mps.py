"""Matrix product states, the two reference ensembles, and entanglement.

Site tensors have shape (D_left, d, D_right) and are kept left-canonical:
sum_n A_n† A_n = 1 on the right bond.  The right environments Gamma_i are
the trace-1 PSD bond matrices whose spectra are the Schmidt coefficients
of the cut between sites i and i+1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ResourceLimitError
from .linalg import RngStream, haar_unitary

# to_statevector / central-gauge guard: d**N may not exceed this
DENSE_GUARD = 2**24

LEFT_CANONICAL_TOL = 1e-10


@dataclass(frozen=True)
class BondProfile:
    """Chain geometry: bond dimensions and per-site coordinate weights.

    dims[i] = min(d^i, d^(N-i), D_max) for bonds 0..N, so edge bonds grow
    geometrically and every environment is generically full rank.
    weights[i-1] = d * dims[i-1] - dims[i] counts the coordinate rows of
    site i; it is also the determinant exponent of bond i in the
    Fubini-Study weight (D(d-1) on the saturated interior).
    """

    n_sites: int
    phys_dim: int
    max_bond: int
    dims: tuple[int, ...]
    weights: tuple[int, ...]

    def site_unitary_dim(self, site: int) -> int:
        """Size d*D_{i-1} of the unitary housing site i's isometry (1-based)."""
        return self.phys_dim * self.dims[site - 1]

    def coord_shape(self, site: int) -> tuple[int, int]:
        """(rows, cols) of the coordinate matrix at a site (1-based)."""
        return self.weights[site - 1], self.dims[site]

    @property
    def cuts(self) -> range:
        """Bond indices carrying an entanglement spectrum (1..N-1)."""
        return range(1, self.n_sites)

    def carries_weight(self, cut: int) -> bool:
        """Whether a cut contributes to the Fubini-Study weight.

        Weight-0 cuts drop out; so do 1-dimensional bonds, whose trace-1
        environment is exactly [[1]].
        """
        return self.weights[cut - 1] > 0 and self.dims[cut] > 1

    def interior_cuts(self) -> list[int]:
        """Cuts where the bond dimension saturates at max_bond."""
        return [i for i in self.cuts if self.dims[i] == self.max_bond]


def bond_profile(n_sites: int, phys_dim: int, max_bond: int) -> BondProfile:
    """Build the bond-dimension profile for an open chain."""
    if n_sites < 1:
        raise ValueError(f"n_sites must be >= 1, got {n_sites}")
    if phys_dim < 2:
        raise ValueError(f"phys_dim must be >= 2, got {phys_dim}")
    if max_bond < 1:
        raise ValueError(f"max_bond must be >= 1, got {max_bond}")
    dims = tuple(min(phys_dim**i, phys_dim**(n_sites - i), max_bond)
                 for i in range(n_sites + 1))
    weights = tuple(phys_dim * dims[i - 1] - dims[i] for i in range(1, n_sites + 1))
    return BondProfile(n_sites, phys_dim, max_bond, dims, weights)


@dataclass
class Mps:
    """Left-canonical matrix product state over a bond profile."""

    profile: BondProfile
    sites: list[np.ndarray]

    def left_canonical_residual(self) -> float:
        """Largest deviation of sum_n A_n† A_n from the identity over sites."""
        worst = 0.0
        for a in self.sites:
            dl, d, dr = a.shape
            m = a.reshape(dl * d, dr)
            worst = max(worst, np.abs(m.conj().T @ m - np.eye(dr)).max())
        return worst


@dataclass
class RightEnvironments:
    """Bond matrices Gamma_1..Gamma_{N-1}; Gamma_N is the scalar 1."""

    profile: BondProfile
    gammas: list[np.ndarray]

    def __getitem__(self, cut: int) -> np.ndarray:
        """Gamma at a 1-based cut."""
        return self.gammas[cut - 1]

    def spectra(self) -> list[np.ndarray]:
        """Eigenvalues (descending) of each Gamma."""
        return [np.linalg.eigvalsh(g)[::-1] for g in self.gammas]


def site_from_unitary(u: np.ndarray, d_left: int, phys_dim: int,
                      d_right: int) -> np.ndarray:
    """First d_right columns of u, reshaped to a (d_left, d, d_right) tensor.

    Columns are stacked physical-block-major: rows n*d_left..(n+1)*d_left-1
    of the isometry form the block A_n.
    """
    iso = u[:, :d_right]
    return np.ascontiguousarray(
        iso.reshape(phys_dim, d_left, d_right).transpose(1, 0, 2))


def sample_rmps(profile: BondProfile, rng: RngStream) -> Mps:
    """Draw from the sequential ensemble: independent Haar unitaries per site."""
    sites = []
    for i in range(1, profile.n_sites + 1):
        u = haar_unitary(profile.site_unitary_dim(i), rng)
        sites.append(site_from_unitary(u, profile.dims[i - 1], profile.phys_dim,
                                       profile.dims[i]))
    return Mps(profile, sites)


def right_environments(mps: Mps) -> RightEnvironments:
    """Gamma_{i-1} = sum_n A^[i]_n Gamma_i A^[i]_n†, from Gamma_N = 1 leftward."""
    profile = mps.profile
    gamma = np.ones((1, 1), dtype=np.complex128)
    gammas = kernels.env_chain(mps.sites[1:], gamma)
    return RightEnvironments(profile, gammas)


def to_statevector(mps: Mps) -> np.ndarray:
    """Contract to a dense vector of length d^N (row-major site order)."""
    profile = mps.profile
    dim = profile.phys_dim**profile.n_sites
    if dim > DENSE_GUARD:
        raise ResourceLimitError(
            f"dense contraction of dimension {dim} exceeds guard {DENSE_GUARD}")
    vec = np.ones((1, 1), dtype=np.complex128)
    for a in mps.sites:
        vec = np.einsum("pa,anb->pnb", vec, a)
        vec = vec.reshape(-1, a.shape[2])
    return vec.reshape(-1)


def entropy_from_spectrum(lams: np.ndarray, base: float = 2.0) -> float:
    """Shannon entropy of a probability spectrum, with 0 log 0 = 0."""
    lams = np.asarray(lams, dtype=float)
    pos = lams[lams > 0.0]
    return float(-(pos * np.log(pos)).sum() / np.log(base))


def entanglement_profile(envs: RightEnvironments, base: float = 2.0) -> np.ndarray:
    """Entanglement entropy S_1..S_{N-1} from the environment spectra."""
    return np.array([entropy_from_spectrum(np.linalg.eigvalsh(g), base)
                     for g in envs.gammas])


def schmidt_spectrum_dense(statevector: np.ndarray, cut: int,
                           profile: BondProfile) -> np.ndarray:
    """Squared singular values (descending) of the cut bipartition.

    Dense oracle for the environment recurrence; sums to 1 for a
    normalized state.
    """
    n, d = profile.n_sites, profile.phys_dim
    if not 1 <= cut <= n - 1:
        raise ValueError(f"cut must be in 1..{n - 1}, got {cut}")
    mat = np.asarray(statevector).reshape(d**cut, d**(n - cut))
    s = np.linalg.svd(mat, compute_uv=False)
    return s**2


def random_product_state(d: int, rng: RngStream) -> np.ndarray:
    vec = rng.complex_normal(d)
    return vec / np.linalg.norm(vec)


def sample_central_gauge(profile: BondProfile, rng: RngStream) -> np.ndarray:
    """Draw from the central-gauge ensemble as a normalized dense vector.

    Left half sites are Haar left-isometries, right half Haar
    right-isometries (mirror construction); the bare contraction has
    norm sqrt(D_center), so the result is normalized explicitly.
    """
    n, d = profile.n_sites, profile.phys_dim
    if d**n > DENSE_GUARD:
        raise ResourceLimitError(
            f"dense contraction of dimension {d**n} exceeds guard {DENSE_GUARD}")
    center = (n + 1) // 2
    left = np.ones((1, 1), dtype=np.complex128)
    for i in range(1, center + 1):
        u = haar_unitary(d * profile.dims[i - 1], rng)
        a = site_from_unitary(u, profile.dims[i - 1], d, profile.dims[i])
        left = np.einsum("pa,anb->pnb", left, a).reshape(-1, a.shape[2])
    right = np.ones((1, 1), dtype=np.complex128)
    for i in range(n, center, -1):
        u = haar_unitary(d * profile.dims[i], rng)
        # right-isometry: first D_{i-1} rows, column blocks are the B_n
        b = u[:profile.dims[i - 1], :].reshape(profile.dims[i - 1], d,
                                               profile.dims[i])
        right = np.einsum("anb,bp->anp", b, right).reshape(b.shape[0], -1)
    vec = (left @ right).reshape(-1)
    return vec / np.linalg.norm(vec)


def dense_entanglement_profile(statevector: np.ndarray, profile: BondProfile,
                               base: float = 2.0) -> np.ndarray:
    """Entropy profile of a dense state via Schmidt spectra at every cut."""
    return np.array([
        entropy_from_spectrum(schmidt_spectrum_dense(statevector, cut, profile),
                              base)
        for cut in profile.cuts
    ])
