# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling and tally-key kernels.

Single-pass scalar implementation of the contract in _kernels_np.py; the
two backends must stay bit-identical.  The uniform conversion multiplies
by an exact power of two, and the inverse-CDF scan reproduces
searchsorted(side="right") with the final index clipped, so no float
path differs from the vectorized fallback.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef unsigned long long u64

cdef u64 GOLD = 0x9E3779B97F4A7C15ULL
cdef u64 MIX_A = 0xBF58476D1CE4E5B9ULL
cdef u64 MIX_B = 0x94D049BB133111EBULL
cdef u64 STREAM_MULT = 0xD1342543DE82EF95ULL
cdef u64 COUNTER_MULT = 0xDABA0B6EB09322E3ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline u64 mix64(u64 z) nogil:
    z ^= z >> 30
    z *= MIX_A
    z ^= z >> 27
    z *= MIX_B
    return z ^ (z >> 31)


def sample_groups(object seed, Py_ssize_t n_groups, int group_size,
                  cnp.ndarray[cnp.float64_t, ndim=1] cum_weights,
                  cnp.ndarray[cnp.float64_t, ndim=2] cum_components,
                  object start=0):
    """See _kernels_np.sample_groups."""
    cdef u64 s = <u64> (int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef u64 first = <u64> (int(start) & 0xFFFFFFFFFFFFFFFF)
    cdef u64 seed_mixed = mix64(s + GOLD)
    cdef int n_comp = cum_components.shape[0]
    cdef int d = cum_components.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.empty(
        (n_groups, group_size), dtype=np.uint8)
    cdef Py_ssize_t g
    cdef int j, c, cat
    cdef u64 base
    cdef double u
    with nogil:
        for g in range(n_groups):
            base = mix64(seed_mixed ^ ((first + <u64> g) * STREAM_MULT))
            u = <double> (mix64(base) >> 11) * INV_2_53
            c = 0
            while c < n_comp - 1 and u >= cum_weights[c]:
                c += 1
            for j in range(group_size):
                u = <double> (mix64(base ^ ((<u64> (j + 1)) * COUNTER_MULT)) >> 11) * INV_2_53
                cat = 0
                while cat < d - 1 and u >= cum_components[c, cat]:
                    cat += 1
                out[g, j] = <unsigned char> cat
    return out


def group_keys(cnp.ndarray[cnp.uint8_t, ndim=2] groups, int d):
    """See _kernels_np.group_keys."""
    cdef Py_ssize_t n = groups.shape[0]
    cdef int k = groups.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] pows = (k + 1) ** np.arange(d, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] keys = np.zeros(n, dtype=np.int64)
    cdef Py_ssize_t i
    cdef int j
    cdef long long acc
    with nogil:
        for i in range(n):
            acc = 0
            for j in range(k):
                acc += pows[groups[i, j]]
            keys[i] = acc
    return keys
