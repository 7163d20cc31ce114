# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: right-environment recurrence and Cholesky log-det.

BLAS/LAPACK work on column-major data; a C-contiguous complex matrix seen
column-major is its transpose, and for the Hermitian environments the two
conventions only swap conjugates, which the call sequence below accounts
for so the returned arrays equal the textbook row-major expressions.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log
from scipy.linalg.cython_blas cimport zgemm
from scipy.linalg.cython_lapack cimport zpotrf

cnp.import_array()

BACKEND = "cython"

ctypedef double complex zcomplex


cdef int _env_step_impl(zcomplex* a, int dl, int d, int dr,
                        zcomplex* gamma, zcomplex* out, zcomplex* work) except -1:
    # out (dl x dl, C-order) = sum_n A_n @ gamma @ A_n†  with A_n = a[:, n, :].
    # In BLAS terms the buffer of A_n starting at a + n*dr with lda = d*dr is
    # the column-major matrix A_n^T (dr x dl); 'C' on it yields conj(A_n) and
    # the accumulated product is conj(Gamma'), i.e. the C-order buffer of
    # Gamma' itself.
    cdef zcomplex one = 1.0, zero = 0.0, beta
    cdef int n, lda = d * dr
    cdef char trans_n = b'N', trans_c = b'C'
    for n in range(d):
        # work (dr x dl, col-major) = Gamma^T @ A_n^T
        zgemm(&trans_n, &trans_n, &dr, &dl, &dr, &one,
              gamma, &dr, a + n * dr, &lda, &zero, work, &dr)
        # out += conj(A_n) @ work
        beta = one if n else zero
        zgemm(&trans_c, &trans_n, &dl, &dl, &dr, &one,
              a + n * dr, &lda, work, &dr, &beta, out, &dl)
    return 0


def env_step(a, gamma):
    """One right-environment recurrence step: sum_n A_n @ gamma @ A_n†."""
    cdef cnp.ndarray[zcomplex, ndim=3, mode='c'] a_c = \
        np.ascontiguousarray(a, dtype=np.complex128)
    cdef cnp.ndarray[zcomplex, ndim=2, mode='c'] g_c = \
        np.ascontiguousarray(gamma, dtype=np.complex128)
    cdef int dl = a_c.shape[0], d = a_c.shape[1], dr = a_c.shape[2]
    cdef cnp.ndarray[zcomplex, ndim=2, mode='c'] out = \
        np.empty((dl, dl), dtype=np.complex128)
    cdef cnp.ndarray[zcomplex, ndim=2, mode='c'] work = \
        np.empty((dl, dr), dtype=np.complex128)
    _env_step_impl(&a_c[0, 0, 0], dl, d, dr, &g_c[0, 0], &out[0, 0], &work[0, 0])
    return out


def env_chain(tensors, gamma):
    """Apply env_step for each site tensor, rightmost first (see fallback)."""
    cdef Py_ssize_t i
    cdef list out = [None] * len(tensors)
    cdef cnp.ndarray[zcomplex, ndim=2, mode='c'] g_c = \
        np.ascontiguousarray(gamma, dtype=np.complex128)
    cdef cnp.ndarray[zcomplex, ndim=3, mode='c'] a_c
    cdef cnp.ndarray[zcomplex, ndim=2, mode='c'] nxt, work
    cdef int dl, d, dr
    for i in range(len(tensors) - 1, -1, -1):
        a_c = np.ascontiguousarray(tensors[i], dtype=np.complex128)
        dl = a_c.shape[0]
        d = a_c.shape[1]
        dr = a_c.shape[2]
        nxt = np.empty((dl, dl), dtype=np.complex128)
        work = np.empty((dl, dr), dtype=np.complex128)
        _env_step_impl(&a_c[0, 0, 0], dl, d, dr, &g_c[0, 0], &nxt[0, 0],
                       &work[0, 0])
        out[i] = nxt
        g_c = nxt
    return out


def chol_logdet(g):
    """log det via Cholesky; NaN signals a failed factorization."""
    cdef cnp.ndarray[zcomplex, ndim=2, mode='c'] a = \
        np.array(g, dtype=np.complex128, order='C', copy=True)
    cdef int n = a.shape[0], info = 0, i
    cdef char uplo = b'L'
    cdef double acc = 0.0, dii
    if n == 0:
        return 0.0
    # factoring the column-major view (the conjugate) gives the same
    # real diagonal, hence the same log-determinant
    zpotrf(&uplo, &n, &a[0, 0], &n, &info)
    if info != 0:
        return float('nan')
    for i in range(n):
        dii = a[i, i].real
        if dii <= 0.0:
            return float('-inf')
        acc += log(dii)
    return 2.0 * acc
