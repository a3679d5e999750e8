# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled bulk discharge over the box of initial vectors."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()


class PathCapExceeded(RuntimeError):
    pass


def full_path_starts(const int64_t[:, ::1] Q, const int64_t[:, ::1] adj_mod,
                     int64_t modulus, const int64_t[:, ::1] targets,
                     int64_t step_cap=100000000):
    """Discharge every initial vector; keep full-path starts in target classes.

    Returns ``(matches, n_full)`` where ``matches`` is a list of
    ``(target_index, start_vector)`` and ``n_full`` counts all full paths.
    """
    cdef Py_ssize_t n = Q.shape[0]
    cdef Py_ssize_t T = targets.shape[0]
    cdef Py_ssize_t i, j, t, r, piv
    cdef int64_t steps, acc, n_full = 0
    cdef bint dead, match

    cdef int64_t[::1] start = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] K = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] lo = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] hi = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] key = np.empty(n, dtype=np.int64)
    # neighbour lists in CSR form
    cdef int64_t[::1] nb_ptr = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t[::1] nb_idx

    for i in range(n):
        lo[i] = Q[i, i] + 2
        hi[i] = -Q[i, i]
        start[i] = lo[i]
        nb_ptr[i + 1] = nb_ptr[i]
        for j in range(n):
            if j != i and Q[i, j] != 0:
                nb_ptr[i + 1] += 1
    nb_idx = np.empty(max(nb_ptr[n], 1), dtype=np.int64)
    r = 0
    for i in range(n):
        for j in range(n):
            if j != i and Q[i, j] != 0:
                nb_idx[r] = j
                r += 1

    matches = []
    for i in range(n):
        if lo[i] > hi[i]:
            return matches, 0

    while True:
        for i in range(n):
            K[i] = start[i]
        steps = 0
        dead = False
        while True:
            piv = -1
            for i in range(n):
                if K[i] == -Q[i, i]:
                    piv = i
                    break
            if piv < 0:
                break
            steps += 1
            if steps > step_cap:
                raise PathCapExceeded("discharge path exceeded step cap")
            K[piv] += 2 * Q[piv, piv]
            for r in range(nb_ptr[piv], nb_ptr[piv + 1]):
                j = nb_idx[r]
                K[j] += 2 * Q[j, piv]
                if K[j] > -Q[j, j]:
                    dead = True
            if dead:
                break
        if not dead:
            n_full += 1
            for r in range(n):
                acc = 0
                for i in range(n):
                    acc += adj_mod[r, i] * ((start[i] - Q[i, i]) // 2)
                acc %= modulus
                if acc < 0:
                    acc += modulus
                key[r] = acc
            for t in range(T):
                match = True
                for r in range(n):
                    if key[r] != targets[t, r]:
                        match = False
                        break
                if match:
                    matches.append((t, tuple([start[i] for i in range(n)])))
        # odometer over the box, last coordinate fastest
        i = n - 1
        while i >= 0:
            start[i] += 2
            if start[i] <= hi[i]:
                break
            start[i] = lo[i]
            i -= 1
        if i < 0:
            break
    return matches, n_full
