"""numpy implementation of the bulk discharge kernel.

Same contract as the compiled ``_discharge.full_path_starts``.  Box vectors
are processed in chunks and discharged in lockstep.
"""

from __future__ import annotations

import numpy as np


class PathCapExceeded(RuntimeError):
    pass


CHUNK = 1 << 18


def _box_chunk(lo: np.ndarray, counts: np.ndarray, begin: int, end: int) -> np.ndarray:
    # mixed-radix digits, last coordinate fastest
    idx = np.arange(begin, end, dtype=np.int64)
    n = len(lo)
    out = np.empty((end - begin, n), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        out[:, i] = lo[i] + 2 * (idx % counts[i])
        idx //= counts[i]
    return out


def full_path_starts(Q, adj_mod, modulus, targets, step_cap=100_000_000):
    Q = np.asarray(Q, dtype=np.int64)
    adj_mod = np.asarray(adj_mod, dtype=np.int64)
    targets = np.asarray(targets, dtype=np.int64).reshape(-1, Q.shape[0])
    diag = np.diag(Q).copy()
    lo = diag + 2
    hi = -diag
    if np.any(lo > hi):
        return [], 0
    counts = (hi - lo) // 2 + 1
    total = int(np.prod(counts, dtype=object))
    twoQ = 2 * Q
    matches = []
    n_full = 0
    for begin in range(0, total, CHUNK):
        end = min(total, begin + CHUNK)
        starts = _box_chunk(lo, counts, begin, end)
        K = starts.copy()
        running = np.arange(len(K))
        full = np.zeros(len(K), dtype=bool)
        steps = 0
        while len(running):
            sub = K[running]
            eq = sub == hi
            has = eq.any(axis=1)
            full[running[~has]] = True
            running = running[has]
            if not len(running):
                break
            steps += 1
            if steps > step_cap:
                raise PathCapExceeded("discharge path exceeded step cap")
            piv = eq[has].argmax(axis=1)
            K[running] += twoQ[piv]
            dead = (K[running] > hi).any(axis=1)
            running = running[~dead]
        sel = starts[full]
        n_full += len(sel)
        if len(sel) and len(targets):
            y = (sel - diag) // 2
            keys = (y @ adj_mod.T) % modulus
            for t, tgt in enumerate(targets):
                hit = np.nonzero((keys == tgt).all(axis=1))[0]
                matches.extend((t, tuple(int(v) for v in sel[h])) for h in hit)
    matches.sort(key=lambda m: m[1])
    return matches, n_full
