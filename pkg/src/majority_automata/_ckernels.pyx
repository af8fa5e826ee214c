# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled synchronous-update kernels over CSR adjacency.

Same contract as ``_pykernels``; states are uint8 rows, 1 meaning blue.
"""

import numpy as np
cimport numpy as cnp
from libc.string cimport memcmp, memcpy

cnp.import_array()

NAME = "cython"


cdef inline void _step_row(const long long[::1] indptr, const int[::1] indices,
                           const unsigned char* src, unsigned char* dst,
                           Py_ssize_t V, int code) noexcept nogil:
    cdef Py_ssize_t v, e
    cdef int blue, deg, twice
    for v in range(V):
        blue = 0
        for e in range(indptr[v], indptr[v + 1]):
            blue += src[indices[e]]
        deg = <int>(indptr[v + 1] - indptr[v])
        if code == 2:
            blue += src[v]
            deg += 1
        twice = 2 * blue
        if code == 1:
            dst[v] = 1 if twice >= deg else 0
        elif twice > deg:
            dst[v] = 1
        elif twice < deg:
            dst[v] = 0
        else:
            dst[v] = src[v]


cdef inline long long _count(const unsigned char* row, Py_ssize_t V) noexcept nogil:
    cdef long long c = 0
    cdef Py_ssize_t v
    for v in range(V):
        c += row[v]
    return c


def blue_counts(const long long[::1] indptr, const int[::1] indices, padded,
                const unsigned char[:, ::1] states):
    cdef Py_ssize_t B = states.shape[0], V = states.shape[1], b, v, e
    out = np.zeros((B, V), dtype=np.int32)
    cdef int[:, ::1] o = out
    cdef int c
    with nogil:
        for b in range(B):
            for v in range(V):
                c = 0
                for e in range(indptr[v], indptr[v + 1]):
                    c += states[b, indices[e]]
                o[b, v] = c
    return out


def step_batch(const long long[::1] indptr, const int[::1] indices, padded,
               const unsigned char[:, ::1] states, int code):
    cdef Py_ssize_t B = states.shape[0], V = states.shape[1], b
    out = np.empty((B, V), dtype=np.uint8)
    cdef unsigned char[:, ::1] o = out
    if V == 0:
        return out
    with nogil:
        for b in range(B):
            _step_row(indptr, indices, &states[b, 0], &o[b, 0], V, code)
    return out


def run_batch(const long long[::1] indptr, const int[::1] indices, padded,
              const unsigned char[:, ::1] states, int code, long long max_steps):
    cdef Py_ssize_t B = states.shape[0], V = states.shape[1], b
    steps_a = np.full(B, max_steps, dtype=np.int64)
    period_a = np.zeros(B, dtype=np.int8)
    minb_a = np.zeros(B, dtype=np.int64)
    maxb_a = np.zeros(B, dtype=np.int64)
    finals_a = np.empty((B, V), dtype=np.uint8)
    cdef long long[::1] steps = steps_a
    cdef signed char[::1] period = period_a
    cdef long long[::1] minb = minb_a
    cdef long long[::1] maxb = maxb_a
    cdef unsigned char[:, ::1] finals = finals_a

    ring_a = np.empty((3, max(V, 1)), dtype=np.uint8)
    cdef unsigned char[:, ::1] ring = ring_a
    cdef unsigned char* older
    cdef unsigned char* cur
    cdef unsigned char* nxt
    cdef unsigned char* tmp
    cdef long long k, c
    cdef int have_older

    with nogil:
        for b in range(B):
            older = &ring[0, 0]
            cur = &ring[1, 0]
            nxt = &ring[2, 0]
            if V > 0:
                memcpy(cur, &states[b, 0], V)
            c = _count(cur, V)
            minb[b] = c
            maxb[b] = c
            have_older = 0
            for k in range(1, max_steps + 1):
                _step_row(indptr, indices, cur, nxt, V, code)
                c = _count(nxt, V)
                if c < minb[b]:
                    minb[b] = c
                if c > maxb[b]:
                    maxb[b] = c
                if memcmp(nxt, cur, V) == 0:
                    period[b] = 1
                    steps[b] = k
                    break
                if have_older and memcmp(nxt, older, V) == 0:
                    period[b] = 2
                    steps[b] = k
                    break
                tmp = older
                older = cur
                cur = nxt
                nxt = tmp
                have_older = 1
            # nxt holds the last computed generation when a cycle closed,
            # cur holds it when the budget ran out
            if V > 0:
                if period[b] != 0:
                    memcpy(&finals[b, 0], nxt, V)
                else:
                    memcpy(&finals[b, 0], cur, V)
    return steps_a, period_a, minb_a, maxb_a, finals_a
