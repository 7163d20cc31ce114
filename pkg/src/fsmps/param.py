"""Gauge-fixed exponential chart on site unitaries and its Jacobian.

A site unitary of size d*D is parameterized by a complex (d-1)D x D
coordinate matrix x through U(x) = U0 exp([[0, -x†], [x, 0]]).  The chart
is injective while the spectrum of x_hat = sqrt(x† x) stays inside
[0, pi/2); all operations hard-fail outside that branch.
"""

from __future__ import annotations

import numpy as np

from .errors import BranchDomainError
from .linalg import anti_hermitian_exp

BRANCH_EPS = 1e-12

# singular-value gaps below this switch the Vandermonde ratio to its
# analytic two-sided limit (sin(2s)/(2s))^2
DEGENERATE_GAP = 1e-6


def _coordinate_sizes(x: np.ndarray, phys_dim: int, bond_dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    expect = ((phys_dim - 1) * bond_dim, bond_dim)
    if x.shape != expect:
        raise ValueError(
            f"coordinate matrix has shape {x.shape}, expected {expect} "
            f"for d={phys_dim}, D={bond_dim}")
    return x


def exp_param(x: np.ndarray, u0: np.ndarray | None = None) -> np.ndarray:
    """Unitary U0 exp([[0, -x†], [x, 0]]) for a w x D coordinate matrix x."""
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 2:
        raise ValueError(f"coordinates must be a matrix, got shape {x.shape}")
    w, d_bond = x.shape
    n = w + d_bond
    k = np.zeros((n, n), dtype=np.complex128)
    k[d_bond:, :d_bond] = x
    k[:d_bond, d_bond:] = -x.conj().T
    u = anti_hermitian_exp(k)
    if u0 is not None:
        u0 = np.asarray(u0, dtype=np.complex128)
        if u0.shape != (n, n):
            raise ValueError(
                f"reference unitary has shape {u0.shape}, expected {(n, n)}")
        u = u0 @ u
    return u


def extract_coordinates(u: np.ndarray, phys_dim: int, bond_dim: int) -> np.ndarray:
    """Invert the chart: coordinates x with exp_param(x) gauge-equivalent to u.

    The first D columns of u split into the bond block A (top D x D) and
    the rest C; with polar factors A = U_A sqrt(1-W), C = U_C sqrt(W) the
    inverse is x = U_C arcsin(sqrt(W)) U_A†, evaluated here through the
    SVD of C (which stays well defined when C is rank deficient).
    """
    u = np.asarray(u, dtype=np.complex128)
    n = phys_dim * bond_dim
    if u.shape != (n, n):
        raise ValueError(f"unitary has shape {u.shape}, expected {(n, n)}")
    a = u[:bond_dim, :bond_dim]
    c = u[bond_dim:, :bond_dim]
    pc, sc, vch = np.linalg.svd(c, full_matrices=False)
    if sc[0]**2 >= 1.0 - BRANCH_EPS:
        raise BranchDomainError(
            f"spectral radius of C†C is {sc[0]**2:.12f}; the arcsin branch "
            "requires it below 1 - 1e-12")
    # A = U_A sqrt(1 - W) shares W's eigenbasis; its polar unitary comes
    # from the same SVD machinery
    pa, sa, vah = np.linalg.svd(a, full_matrices=False)
    u_a = pa @ vah
    return pc @ np.diag(np.arcsin(sc)) @ vch @ u_a.conj().T


def singular_angles(x: np.ndarray) -> np.ndarray:
    """Eigenvalues of x_hat = sqrt(x† x), i.e. the singular values of x."""
    return np.linalg.svd(np.asarray(x, dtype=np.complex128), compute_uv=False)


def _vandermonde_ratio(s: np.ndarray) -> float:
    """prod_{k<l} ((sin^2 s_k - sin^2 s_l) / (s_k^2 - s_l^2))^2.

    Near-degenerate pairs use the analytic limit (sin(2s)/(2s))^2 at the
    midpoint.
    """
    total = 1.0
    for k in range(len(s)):
        for l in range(k + 1, len(s)):
            if abs(s[k] - s[l]) < DEGENERATE_GAP:
                mid = 0.5 * (s[k] + s[l])
                total *= float(np.sinc(2 * mid / np.pi))**2
            else:
                num = np.sin(s[k])**2 - np.sin(s[l])**2
                den = s[k]**2 - s[l]**2
                total *= float(num / den)**2
    return total


def jacobian(x: np.ndarray, phys_dim: int, bond_dim: int) -> float:
    """Density of the Haar measure relative to Lebesgue dx at coordinates x.

    Evaluated on the singular values s_k of x:
        prod_k (sin^2 s_k / s_k^2)^{D(d-2)} * prod_k sin(2 s_k)/(2 s_k)
        * prod_{k<l} ((sin^2 s_k - sin^2 s_l)/(s_k^2 - s_l^2))^2
    with the removable singularities at s_k = 0 and s_k = s_l filled in.
    """
    x = _coordinate_sizes(x, phys_dim, bond_dim)
    s = singular_angles(x)
    if s[0] >= np.pi / 2:
        raise BranchDomainError(
            f"coordinate singular value {s[0]:.6f} outside [0, pi/2)")
    sinc = np.sinc(s / np.pi)           # sin(s)/s with the s=0 limit
    sinc2 = np.sinc(2 * s / np.pi)      # sin(2s)/(2s)
    val = float(np.prod(sinc**(2 * bond_dim * (phys_dim - 2))))
    val *= float(np.prod(sinc2))
    val *= _vandermonde_ratio(s)
    return val


def jacobian_first_order(x: np.ndarray, phys_dim: int, bond_dim: int) -> float:
    """Small-x approximation exp(-(D d / 3) tr x† x)."""
    x = _coordinate_sizes(x, phys_dim, bond_dim)
    tr = float(np.sum(np.abs(x)**2))
    return float(np.exp(-bond_dim * phys_dim / 3.0 * tr))
