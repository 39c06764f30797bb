"""Pure-numpy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and exact integer results; each row is vectorized over all
columns.
"""
import numpy as np

IMPLEMENTATION = "python"


def tree_pair_sum(ids, nsyl, total, side, length, dmat, weights, start, stop):
    ids = np.asarray(ids)
    n, width = ids.shape
    nsyl = np.asarray(nsyl, dtype=np.int64)
    total = np.asarray(total, dtype=np.int64)
    side = np.asarray(side)
    length = np.asarray(length, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.int64)
    safe = np.where(ids >= 0, ids, 0)
    # cumulative syllable lengths, cum[:, k] = length of the first k syllables
    cum = np.zeros((n, width + 1), dtype=np.int64)
    cum[:, 1:] = np.cumsum(np.where(ids >= 0, length[safe], 0), axis=1)
    rows = np.arange(n)
    acc = 0
    for i in range(start, stop):
        same = np.logical_and.accumulate(ids == ids[i], axis=1) if width else np.zeros((n, 0), bool)
        k = np.minimum(same.sum(axis=1), np.minimum(nsyl, nsyl[i]))
        d = total + total[i] - 2 * cum[i, k]
        both = (k < nsyl) & (k < nsyl[i])
        if both.any():
            kk = k[both]
            u = ids[i, kk]
            v = ids[rows[both], kk]
            hit = side[u] == side[v]
            if hit.any():
                uu, vv = u[hit], v[hit]
                corr = np.zeros(len(kk), dtype=np.int64)
                corr[hit] = dmat[uu, vv].astype(np.int64) - length[uu] - length[vv]
                d[both] += corr
        acc += int(weights[i]) * int(np.dot(weights, d))
    return acc


def l1_pair_sum(vecs, weights, start, stop):
    vecs = np.asarray(vecs, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.int64)
    acc = 0
    for i in range(start, stop):
        d = np.abs(vecs - vecs[i]).sum(axis=1)
        acc += int(weights[i]) * int(np.dot(weights, d))
    return acc
