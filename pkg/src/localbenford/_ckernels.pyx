# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops over 192-bit residues.

A wide residue is three uint64 words, most significant first.  Every
routine here has a line-for-line twin in ``_pykernels`` and must produce
bit-identical output.
"""

from libc.stdint cimport uint64_t, int64_t, int32_t

cdef extern from *:
    """
    #include <stdint.h>
    typedef unsigned __int128 lb_u128;

    static inline void lb_add192(uint64_t *r, const uint64_t *a) {
        uint64_t s2 = r[2] + a[2];
        uint64_t c2 = s2 < a[2];
        uint64_t s1 = r[1] + a[1];
        uint64_t c1 = s1 < a[1];
        s1 += c2;
        c1 += s1 < c2;
        r[0] = r[0] + a[0] + c1;
        r[1] = s1;
        r[2] = s2;
    }

    static inline void lb_mul192_u64(uint64_t *r, uint64_t m) {
        lb_u128 p2 = (lb_u128)r[2] * m;
        lb_u128 p1 = (lb_u128)r[1] * m + (uint64_t)(p2 >> 64);
        uint64_t w0 = r[0] * m + (uint64_t)(p1 >> 64);
        r[2] = (uint64_t)p2;
        r[1] = (uint64_t)p1;
        r[0] = w0;
    }

    static inline void lb_window128(const uint64_t *hi, const uint64_t *lo,
                                    const int64_t *t, int k,
                                    uint64_t *out_hi, uint64_t *out_lo) {
        lb_u128 acc = 0;
        for (int i = 0; i < k; i++) {
            lb_u128 x = ((lb_u128)hi[i] << 64) | lo[i];
            acc += x * (lb_u128)(__int128)t[i];
        }
        *out_hi = (uint64_t)(acc >> 64);
        *out_lo = (uint64_t)acc;
    }
    """
    void lb_add192(uint64_t *r, const uint64_t *a) nogil
    void lb_mul192_u64(uint64_t *r, uint64_t m) nogil
    void lb_window128(const uint64_t *hi, const uint64_t *lo, const int64_t *t, int k,
                      uint64_t *out_hi, uint64_t *out_lo) nogil

NAME = "cython"


def polyexp_fill(uint64_t[:, ::1] regs, uint64_t[:, ::1] out):
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t d = regs.shape[0] - 1
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            out[i, 0] = regs[0, 0]
            out[i, 1] = regs[0, 1]
            out[i, 2] = regs[0, 2]
            for j in range(d):
                lb_add192(&regs[j, 0], &regs[j + 1, 0])


def prefix_sum_fill(uint64_t[:, ::1] values, uint64_t[::1] acc):
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            lb_add192(&acc[0], &values[i, 0])
            values[i, 0] = acc[0]
            values[i, 1] = acc[1]
            values[i, 2] = acc[2]


def factor_log_fill(int64_t m0, uint64_t[:, ::1] out, int32_t[::1] spf_idx,
                    int64_t[::1] primes, uint64_t[:, ::1] plog):
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t j
    cdef int64_t m
    cdef int32_t idx
    with nogil:
        for j in range(n):
            out[j, 0] = 0
            out[j, 1] = 0
            out[j, 2] = 0
            m = m0 + j
            while m > 1:
                idx = spf_idx[m]
                lb_add192(&out[j, 0], &plog[idx, 0])
                m = m // primes[idx]


def scale_fill(uint64_t[:, ::1] values, uint64_t[::1] mult):
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            lb_mul192_u64(&values[i, 0], mult[i])


def window_residues(uint64_t[::1] hi, uint64_t[::1] lo, int64_t[::1] t,
                    uint64_t[::1] out_hi, uint64_t[::1] out_lo):
    cdef Py_ssize_t n = out_hi.shape[0]
    cdef int k = <int>t.shape[0]
    cdef Py_ssize_t i
    if hi.shape[0] < n + k - 1:
        raise ValueError("window input shorter than n + k - 1")
    with nogil:
        for i in range(n):
            lb_window128(&hi[i], &lo[i], &t[0], k, &out_hi[i], &out_lo[i])
