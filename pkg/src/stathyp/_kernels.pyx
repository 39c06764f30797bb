# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pair-distance kernels.

Elements of tree-like groups (free groups, the infinite dihedral group, free
products) are given as rows of syllable ids. Two elements share a common
prefix of equal syllables; past it the distance is the sum of the remaining
lengths, corrected by the factor distance when the first differing syllables
live in the same factor.
"""
from libc.stdint cimport int32_t, int64_t

IMPLEMENTATION = "cython"


def tree_pair_sum(const int32_t[:, ::1] ids,
                  const int32_t[::1] nsyl,
                  const int64_t[::1] total,
                  const int32_t[::1] side,
                  const int32_t[::1] length,
                  const int32_t[:, ::1] dmat,
                  const int64_t[::1] weights,
                  Py_ssize_t start,
                  Py_ssize_t stop):
    """Sum of ``w_i * w_j * d(i, j)`` over rows ``start <= i < stop`` and all ``j``."""
    cdef Py_ssize_t n = ids.shape[0]
    cdef Py_ssize_t i, j, k, kmax
    cdef int32_t u, v
    cdef int64_t acc = 0, row, prefix, d
    with nogil:
        for i in range(start, stop):
            row = 0
            for j in range(n):
                kmax = nsyl[i] if nsyl[i] < nsyl[j] else nsyl[j]
                k = 0
                prefix = 0
                while k < kmax and ids[i, k] == ids[j, k]:
                    prefix += length[ids[i, k]]
                    k += 1
                d = total[i] + total[j] - 2 * prefix
                if k < nsyl[i] and k < nsyl[j]:
                    u = ids[i, k]
                    v = ids[j, k]
                    if side[u] == side[v]:
                        d += dmat[u, v] - length[u] - length[v]
                row += weights[j] * d
            acc += weights[i] * row
    return acc


def l1_pair_sum(const int64_t[:, ::1] vecs,
                const int64_t[::1] weights,
                Py_ssize_t start,
                Py_ssize_t stop):
    """Sum of ``w_i * w_j * |v_i - v_j|_1`` over rows ``start <= i < stop`` and all ``j``."""
    cdef Py_ssize_t n = vecs.shape[0], dim = vecs.shape[1]
    cdef Py_ssize_t i, j, c
    cdef int64_t acc = 0, row, d, t
    with nogil:
        for i in range(start, stop):
            row = 0
            for j in range(n):
                d = 0
                for c in range(dim):
                    t = vecs[i, c] - vecs[j, c]
                    d += t if t >= 0 else -t
                row += weights[j] * d
            acc += weights[i] * row
    return acc
