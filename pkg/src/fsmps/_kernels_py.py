"""Pure-numpy reference implementation of the hot kernels.

Selected at import time when the compiled extension is unavailable (or
when FSMPS_PURE_PYTHON=1).  Semantics match fsmps._kernels exactly; only
speed differs.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def env_step(a: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """One right-environment recurrence step: sum_n A_n @ gamma @ A_n†.

    a has shape (D_left, d, D_right), gamma (D_right, D_right); the result
    is (D_left, D_left) and inherits gamma's trace.
    """
    tmp = a @ gamma
    return np.tensordot(tmp, a.conj(), axes=([1, 2], [1, 2]))


def env_chain(tensors, gamma: np.ndarray) -> list[np.ndarray]:
    """Apply env_step for each site tensor, rightmost first.

    tensors is ordered left to right; returns [gamma_before_first, ...,
    gamma_before_last] in the same left-to-right order.
    """
    out = [None] * len(tensors)
    for i in range(len(tensors) - 1, -1, -1):
        gamma = env_step(tensors[i], gamma)
        out[i] = gamma
    return out


def chol_logdet(g: np.ndarray) -> float:
    """log det via Cholesky; NaN signals a failed factorization."""
    try:
        ell = np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        return np.nan
    d = np.diagonal(ell).real
    if np.any(d <= 0.0):
        return -np.inf
    return 2.0 * float(np.log(d).sum())
