"""Closed-form Marchenko-Pastur density for overlay curves."""

import numpy as np


def support(c):
    if not 0.0 < c <= 1.0:
        raise ValueError(f"aspect ratio must be in (0, 1], got {c}")
    return (1.0 - np.sqrt(c))**2, (1.0 + np.sqrt(c))**2


def density(lam, c):
    """Unit-mean MP density sqrt((hi-x)(x-lo)) / (2 pi c x), 0 outside."""
    lo, hi = support(c)
    lam = np.asarray(lam, dtype=float)
    out = np.zeros_like(lam)
    inside = (lam > lo) & (lam < hi)
    x = lam[inside]
    out[inside] = np.sqrt((hi - x) * (x - lo)) / (2 * np.pi * c * x)
    return out


def integral_mass(c, points=4000):
    """Numeric mass of the density over its support.

    Midpoint rule after the substitution x = lo + (hi-lo) sin^2(theta),
    with the square root cancelled analytically so the c = 1 edge
    divergence stays finite.
    """
    lo, hi = support(c)
    step = (np.pi / 2) / points
    mid = (np.arange(points) + 0.5) * step
    x = lo + (hi - lo) * np.sin(mid)**2
    q = (hi - lo)**2 * np.sin(2 * mid)**2 / (4 * np.pi * c * x)
    return float(q.sum() * step)


def overlay_curve(c, points=2000):
    """(x, density) arrays for plotting, plus a normalization self-check.

    Raises if the density does not integrate to 1 within 1e-6, which would
    indicate a transcription error in the closed form.
    """
    lo, hi = support(c)
    theta = np.linspace(0.0, np.pi / 2, points)
    x = lo + (hi - lo) * np.sin(theta)**2
    y = density(x, c)
    mass = integral_mass(c)
    if abs(mass - 1.0) > 1e-6:
        raise AssertionError(
            f"MP overlay for c={c} integrates to {mass!r}, expected 1")
    return x, y
