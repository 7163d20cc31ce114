"""Marchenko-Pastur reference laws and truncated S-transform algebra.

The environment spectra are compared against MP(c) after scaling
eigenvalues by the bond dimension (unit-mean convention).  The S-transform
side works with truncated real power series: moments M(z) = sum M_n z^n,
S(z) = (1+z)/z * M^<-1>(z), and the one-site transfer map
S'(z) = (1 + z/d^2)/(1 + z/d) * S(z/d).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.integrate import quad

from .errors import NonInvertibleSeriesError
from .mps import RightEnvironments

DEFAULT_ORDER = 8


def mp_support(c: float) -> tuple[float, float]:
    """Support endpoints (1 -+ sqrt(c))^2 of the unit-mean MP law."""
    if not 0.0 < c <= 1.0:
        raise ValueError(f"aspect ratio must be in (0, 1], got {c}")
    root = np.sqrt(c)
    return (1.0 - root) ** 2, (1.0 + root) ** 2


def mp_density(lam, c: float):
    """Unit-mean Marchenko-Pastur density, 0 outside the support."""
    lo, hi = mp_support(c)
    lam = np.asarray(lam, dtype=float)
    inside = (lam > lo) & (lam < hi)
    out = np.zeros_like(lam)
    lam_in = lam[inside]
    out[inside] = np.sqrt((hi - lam_in) * (lam_in - lo)) / (2 * np.pi * c * lam_in)
    return out if out.ndim else float(out)


def _mp_quad(f, c: float, theta_hi: float = np.pi / 2) -> float:
    """Integral of f(lam) d MP_c(lam) with an endpoint-smoothing substitution.

    lam = lo + (hi - lo) sin^2(theta) turns the square-root edges into a
    smooth integrand, so adaptive quadrature converges fast.
    """
    lo, hi = mp_support(c)
    width = hi - lo

    def integrand(theta):
        s, co = np.sin(theta), np.cos(theta)
        lam = lo + width * s * s
        dens = np.sqrt((hi - lam) * (lam - lo)) / (2 * np.pi * c * lam)
        return f(lam) * dens * width * 2 * s * co

    val, _ = quad(integrand, 0.0, theta_hi, limit=200)
    return val


def mp_cdf(lam, c: float):
    """CDF of the unit-mean MP law by adaptive quadrature."""
    lo, hi = mp_support(c)

    def one(x: float) -> float:
        if x <= lo:
            return 0.0
        if x >= hi:
            return 1.0
        theta = np.arcsin(min(1.0, np.sqrt((x - lo) / (hi - lo))))
        return min(1.0, _mp_quad(lambda _: 1.0, c, theta))

    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 0:
        return one(float(lam))
    return np.array([one(x) for x in lam])


def mp_moments(c: float, order: int) -> np.ndarray:
    """Moments m_1..m_order of MP(c) via the Narayana polynomials."""
    if not 0.0 < c <= 1.0:
        raise ValueError(f"aspect ratio must be in (0, 1], got {c}")
    if order > 16:
        raise ValueError("moment order capped at 16")
    out = np.zeros(order)
    for k in range(1, order + 1):
        total = 0.0
        for j in range(1, k + 1):
            narayana = comb(k, j) * comb(k, j - 1) // k
            total += narayana * c ** (j - 1)
        out[k - 1] = total
    return out


def scaled_cut_eigenvalues(env_samples, cut: int) -> np.ndarray:
    """Pool D * eigenvalues of Gamma_cut across environment samples.

    The scaling gives the pooled spectrum unit mean (trace-1 environments
    have mean eigenvalue 1/D).  Only saturated interior cuts are accepted;
    edge cuts follow different limiting laws.
    """
    env_samples = list(env_samples)
    if not env_samples:
        raise ValueError("need at least one environment sample")
    profile = env_samples[0].profile
    if profile.dims[cut] != profile.max_bond:
        raise ValueError(
            f"cut {cut} has bond dimension {profile.dims[cut]} < "
            f"max_bond {profile.max_bond}: not in the saturated interior")
    pooled = []
    for envs in env_samples:
        if not isinstance(envs, RightEnvironments):
            raise TypeError("env_samples must contain RightEnvironments")
        pooled.append(np.linalg.eigvalsh(envs[cut]) * profile.dims[cut])
    return np.concatenate(pooled)


def ks_distance(samples, cdf) -> float:
    """Sup-norm distance between the empirical CDF and a reference CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    if n == 0:
        raise ValueError("need at least one sample")
    ref = np.asarray(cdf(x), dtype=float)
    grid = np.arange(1, n + 1) / n
    return float(max(np.abs(ref - grid).max(), np.abs(ref - (grid - 1 / n)).max()))


# ---------------------------------------------------------------------------
# truncated power series and S-transforms


@dataclass(frozen=True)
class MomentSeries:
    """Moments M_1..M_K of M(z) = sum_n M_n z^n."""

    coeffs: tuple[float, ...]

    @property
    def order(self) -> int:
        return len(self.coeffs)


@dataclass(frozen=True)
class STransform:
    """Coefficients of S(z) = s_0 + s_1 z + ... + s_{K-1} z^{K-1}."""

    coeffs: tuple[float, ...]

    @property
    def order(self) -> int:
        return len(self.coeffs)


def _series_mul(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros(order)
    for i, ai in enumerate(a[:order]):
        if ai == 0.0:
            continue
        hi = min(order - i, len(b))
        out[i:i + hi] += ai * b[:hi]
    return out


def _compositional_inverse(m: np.ndarray) -> np.ndarray:
    """Coefficients g_1..g_K of g with m(g(z)) = z through order K.

    Input and output hold the z^1..z^K coefficients of series without a
    constant term.  Solved coefficient by coefficient: at each order k,
    m_1 g_k cancels the z^k coefficient of sum_{j>=2} m_j g(z)^j, which
    only involves already-known g's.
    """
    order = len(m)
    if m[0] == 0.0:
        raise NonInvertibleSeriesError("series has vanishing linear coefficient")
    g = np.zeros(order + 1)  # indexed by power of z
    g[1] = 1.0 / m[0]
    for k in range(2, order + 1):
        acc = 0.0
        power = _series_mul(g, g, k + 1)  # g^2 truncated past z^k
        for j in range(2, k + 1):
            acc += m[j - 1] * power[k]
            if j < k:
                power = _series_mul(power, g, k + 1)
        g[k] = -acc / m[0]
    return g[1:]


def moments_to_stransform(m: MomentSeries) -> STransform:
    """S(z) = (1+z)/z * M^<-1>(z), truncated at the series order."""
    coeffs = np.asarray(m.coeffs, dtype=float)
    inv = _compositional_inverse(coeffs)  # coefficients of z^1..z^K
    # divide by z, multiply by (1+z): s_k = inv_{k+1} + inv_k
    order = len(inv)
    s = np.zeros(order)
    s[0] = inv[0]
    s[1:] = inv[1:] + inv[:-1]
    return STransform(tuple(s))


def stransform_to_moments(s: STransform) -> MomentSeries:
    """Inverse of moments_to_stransform at the same truncation order."""
    coeffs = np.asarray(s.coeffs, dtype=float)
    order = len(coeffs)
    if coeffs[0] == 0.0:
        raise NonInvertibleSeriesError("S(0) = 0 cannot come from M_1 != 0")
    # M^<-1>(z) = z S(z) / (1+z): series division by (1+z) is an
    # alternating partial sum
    minv = np.zeros(order)
    run = 0.0
    for k in range(order):
        run = coeffs[k] - run
        minv[k] = run
    return MomentSeries(tuple(_compositional_inverse(minv)))


def mp_stransform(c: float, order: int = DEFAULT_ORDER) -> STransform:
    """S(z) = 1/(1 + c z), the MP fixed point at aspect ratio c."""
    return STransform(tuple((-c) ** k for k in range(order)))


def point_mass_stransform(order: int = DEFAULT_ORDER) -> STransform:
    """S = 1, the identity element of free multiplication (point mass at 1)."""
    return STransform((1.0,) + (0.0,) * (order - 1))


def transfer_stransform(s: STransform, phys_dim: int) -> STransform:
    """One environment-recurrence step on an S-transform:
    S'(z) = (1 + z/d^2) / (1 + z/d) * S(z/d)."""
    d = phys_dim
    order = s.order
    scaled = np.array([sk / d**k for k, sk in enumerate(s.coeffs)])
    # (1 + z/d^2) * sum_k (-z/d)^k
    geo = np.array([(-1.0 / d) ** k for k in range(order)])
    pref = geo.copy()
    pref[1:] += geo[:-1] / d**2
    return STransform(tuple(_series_mul(pref, scaled, order)))


def fs_aspect_ratio(phys_dim: int) -> float:
    """First-order aspect ratio 1/(2d - 1) of the FS environment spectrum."""
    if phys_dim < 2:
        raise ValueError(f"physical dimension must be >= 2, got {phys_dim}")
    return 1.0 / (2 * phys_dim - 1)
