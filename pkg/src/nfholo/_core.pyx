# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.

Two inner loops dominate iterative reconstruction at realistic sizes:
the frequency/range spectral contraction of the holographic pair and
the windowed-sinc gather of the Stolt resampler. Both are implemented
here as serial loops with a fixed accumulation order so results are
bit-reproducible; `nfholo._core_np` provides NumPy equivalents with the
same signatures and `nfholo._backend` picks one at import time.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def contract(kernel, x, bint conjugate=False):
    """out[a, p] = sum_b kernel[a, b, p] * x[b, p], optionally conj(kernel).

    `kernel` may be a strided view (e.g. a transposed table); `x` must be
    C-contiguous complex128.
    """
    cdef double complex[:, :, :] K = kernel
    cdef double complex[:, ::1] X = x
    cdef Py_ssize_t A = K.shape[0], B = K.shape[1], P = K.shape[2]
    if X.shape[0] != B or X.shape[1] != P:
        raise ValueError("operand shape does not match kernel")
    out = np.zeros((A, P), dtype=np.complex128)
    cdef double complex[:, ::1] O = out
    cdef Py_ssize_t a, b, p
    with nogil:
        if conjugate:
            for a in range(A):
                for b in range(B):
                    for p in range(P):
                        O[a, p] = O[a, p] + K[a, b, p].conjugate() * X[b, p]
        else:
            for a in range(A):
                for b in range(B):
                    for p in range(P):
                        O[a, p] = O[a, p] + K[a, b, p] * X[b, p]
    return out


def stolt_gather(lines, idx, taps):
    """Windowed-sinc gather: out[l, t] = sum_n taps[l, t, n] * lines[l, idx[l, t] + n].

    A negative start index marks a dead or out-of-support target whose
    output stays zero. Start indices are pre-clipped by the planner so
    idx + n never leaves the line.
    """
    cdef double complex[:, ::1] L = lines
    cdef int[:, ::1] I = idx
    cdef double[:, :, ::1] T = taps
    cdef Py_ssize_t n_lines = L.shape[0], n_src = L.shape[1]
    cdef Py_ssize_t n_t = I.shape[1], n_taps = T.shape[2]
    if I.shape[0] != n_lines or T.shape[0] != n_lines or T.shape[1] != n_t:
        raise ValueError("index/tap table shapes do not match lines")
    out = np.zeros((n_lines, n_t), dtype=np.complex128)
    cdef double complex[:, ::1] O = out
    cdef Py_ssize_t l, t, n
    cdef int base
    cdef double complex acc
    with nogil:
        for l in range(n_lines):
            for t in range(n_t):
                base = I[l, t]
                if base < 0:
                    continue
                acc = 0
                for n in range(n_taps):
                    acc = acc + T[l, t, n] * L[l, base + n]
                O[l, t] = acc
    return out
