"""Dense complex linear-algebra kernels and seeded randomness.

Everything here is double precision and desk-scale (matrices up to a few
hundred rows); the heavier eigen/QR work is delegated to LAPACK through
numpy.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolationError, DegeneratePolarError

# Eigenvalues at or below this are treated as an exact zero by log_det_psd;
# the determinant weights legitimately vanish on singular environments.
LOGDET_FLOOR = 1e-300


class RngStream:
    """Counter-based random stream addressed by (seed, stream_id).

    Identical (seed, stream_id) pairs reproduce the same draw sequence on
    any platform; distinct stream_ids give statistically independent
    streams (Philox jump-ahead).  A stream is single-owner mutable state:
    one per chain/worker, never shared.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        bitgen = np.random.Philox(key=self.seed)
        if self.stream_id:
            bitgen = bitgen.jumped(self.stream_id)
        self.generator = np.random.Generator(bitgen)

    def spawn(self, stream_id: int) -> "RngStream":
        """Independent stream with the same seed and a new stream id."""
        return RngStream(self.seed, stream_id)

    # -- serialization (used by sampler checkpoints) --

    def state_dict(self) -> dict:
        st = self.generator.bit_generator.state
        return {
            "seed": self.seed,
            "stream_id": self.stream_id,
            "counter": [int(v) for v in st["state"]["counter"]],
            "key": [int(v) for v in st["state"]["key"]],
            "buffer": [int(v) for v in st["buffer"]],
            "buffer_pos": int(st["buffer_pos"]),
            "has_uint32": int(st["has_uint32"]),
            "uinteger": int(st["uinteger"]),
        }

    @classmethod
    def from_state_dict(cls, state: dict) -> "RngStream":
        rng = cls(state["seed"], state["stream_id"])
        rng.generator.bit_generator.state = {
            "bit_generator": "Philox",
            "state": {
                "counter": np.array(state["counter"], dtype=np.uint64),
                "key": np.array(state["key"], dtype=np.uint64),
            },
            "buffer": np.array(state["buffer"], dtype=np.uint64),
            "buffer_pos": state["buffer_pos"],
            "has_uint32": state["has_uint32"],
            "uinteger": state["uinteger"],
        }
        return rng

    # -- draw helpers --

    def standard_normal(self, shape=None) -> np.ndarray:
        return self.generator.standard_normal(shape)

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self.generator.uniform(low, high, size)

    def complex_normal(self, shape) -> np.ndarray:
        """Entries with independent N(0, 1/2) real and imaginary parts."""
        re = self.generator.standard_normal(shape)
        im = self.generator.standard_normal(shape)
        return (re + 1j * im) / np.sqrt(2.0)


def _as_complex_matrix(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(np.float64))):
        raise ContractViolationError(f"{name} contains non-finite entries")
    return a


def _check_hermitian(h: np.ndarray, tol: float, name: str) -> np.ndarray:
    h = _as_complex_matrix(h, name)
    if h.shape[0] != h.shape[1]:
        raise ValueError(f"{name} must be square, got shape {h.shape}")
    scale = max(1.0, np.abs(h).max())
    if np.abs(h - h.conj().T).max() > tol * scale:
        raise ContractViolationError(f"{name} is not Hermitian within {tol}")
    return h


def haar_unitary(n: int, rng: RngStream) -> np.ndarray:
    """Draw an n x n unitary from the Haar measure.

    QR of a complex Ginibre matrix, with the R diagonal phases divided out;
    without the phase correction the naive QR distribution is biased.
    """
    if n < 1:
        raise ValueError(f"unitary dimension must be >= 1, got {n}")
    z = rng.complex_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def hermitian_eigensystem(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvector matrix of a Hermitian matrix."""
    h = _check_hermitian(h, 1e-10, "eigensystem input")
    w, v = np.linalg.eigh(h)
    return w, v


def log_det_psd(g: np.ndarray) -> float:
    """log det of a Hermitian PSD matrix; -inf when it is singular.

    Eigenvalues at or below LOGDET_FLOOR count as zero.  Indefinite input
    (an eigenvalue below -1e-10 * trace) is a contract violation.
    """
    g = _check_hermitian(g, 1e-10, "log_det_psd input")
    w = np.linalg.eigvalsh(g)
    tr = float(np.trace(g).real)
    if w[0] < -1e-10 * max(tr, 1.0):
        raise ContractViolationError(
            f"matrix is indefinite: min eigenvalue {w[0]:.3e} for trace {tr:.3e}")
    if w[0] <= LOGDET_FLOOR:
        return -np.inf
    from . import kernels
    return kernels.logdet_psd(g)


def polar_decompose(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Polar factors (u, w) of a tall matrix c = u @ sqrtm(w), w = c† c.

    u is the m x n isometric factor, w the n x n PSD Gram matrix.  Requires
    full column rank; rank-deficient input raises DegeneratePolarError so
    the caller can pick a fallback.
    """
    c = _as_complex_matrix(c, "polar input")
    m, n = c.shape
    if m < n:
        raise ValueError(f"polar_decompose expects m >= n, got shape {c.shape}")
    p, s, vh = np.linalg.svd(c, full_matrices=False)
    if s[-1] <= 1e-12 * max(s[0], 1e-300):
        raise DegeneratePolarError(
            f"rank-deficient input: smallest singular value {s[-1]:.3e}")
    u = p @ vh
    w = c.conj().T @ c
    return u, (w + w.conj().T) / 2


def anti_hermitian_exp(k: np.ndarray) -> np.ndarray:
    """exp(K) for anti-Hermitian K, via the eigendecomposition of iK.

    The result is unitary to machine precision by construction.
    """
    k = _as_complex_matrix(k, "exponent")
    scale = max(1.0, np.abs(k).max())
    if np.abs(k + k.conj().T).max() > 1e-10 * scale:
        raise ContractViolationError("exponent is not anti-Hermitian within 1e-10")
    w, v = np.linalg.eigh(1j * k)
    return (v * np.exp(-1j * w)) @ v.conj().T


def complete_isometry(m: np.ndarray) -> np.ndarray:
    """Extend an isometry (orthonormal columns) to a full unitary.

    The added columns are an orthonormal basis of the complement, chosen
    deterministically from the SVD of m.
    """
    m = _as_complex_matrix(m, "isometry")
    rows, cols = m.shape
    if rows == cols:
        return m.copy()
    u, _, _ = np.linalg.svd(m, full_matrices=True)
    comp = u[:, cols:]
    # project out any residual overlap from rounding
    comp = comp - m @ (m.conj().T @ comp)
    comp, _ = np.linalg.qr(comp)
    return np.hstack([m, comp])
