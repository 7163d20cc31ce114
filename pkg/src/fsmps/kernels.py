"""Backend selection for the hot kernels.

Prefers the compiled extension; falls back to the numpy reference
implementation when the extension is missing or FSMPS_PURE_PYTHON is set.
"""

from __future__ import annotations

import os

import numpy as np

from .linalg import LOGDET_FLOOR

if os.environ.get("FSMPS_PURE_PYTHON"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND: str = _impl.BACKEND
env_step = _impl.env_step
env_chain = _impl.env_chain
_chol_logdet = _impl.chol_logdet


def logdet_psd(g: np.ndarray) -> float:
    """log det of a Hermitian PSD matrix, -inf on a (near-)singular one.

    Cholesky fast path with an eigenvalue fallback; no positivity
    validation (callers pass environments that are PSD by construction).
    """
    val = _chol_logdet(np.asarray(g, dtype=np.complex128))
    if not np.isnan(val):
        return val
    w = np.linalg.eigvalsh(g)
    if w[0] <= LOGDET_FLOOR:
        return -np.inf
    return float(np.log(w).sum())
