"""Pure numpy implementations of the hot loops, used when the compiled module is missing."""

import numpy as np

NAME = "python"

_GRAY_CHUNK = 1 << 16


def prepare_dense(w):
    wf = np.asarray(w, dtype=np.float64)
    n = wf.shape[0]
    absf = np.abs(wf)
    # complete unit graphs: |W| x == sum(x) - x, no second matrix needed
    off = ~np.eye(n, dtype=bool)
    if n > 1 and np.all(absf[off] == 1.0):
        absf = None
    return wf, absf


def dense_sums(handle, a, b):
    wf, absf = handle
    x = np.column_stack((a, b))
    signed = wf @ x
    if absf is None:
        total = x.sum(axis=0) - x
    else:
        total = absf @ x
    f = 0.5 * (total - signed)
    af = 0.5 * (total + signed)
    return f[:, 0], af[:, 0], f[:, 1], af[:, 1]


def dense_energy(handle, s):
    wf = handle[0]
    return 0.5 * float(s @ (wf @ s))


def prepare_sparse(indptr, indices, weights, n):
    indptr = np.asarray(indptr, dtype=np.int64)
    rows = np.repeat(np.arange(n), np.diff(indptr))
    weights = np.asarray(weights, dtype=np.float64)
    anti = np.where(weights > 0, weights, 0.0)
    ferro = np.where(weights < 0, -weights, 0.0)
    return rows, np.asarray(indices, dtype=np.int64), ferro, anti, n


def sparse_sums(handle, a, b):
    rows, cols, ferro, anti, n = handle
    ak = a[cols]
    bk = b[cols]

    def rowsum(v):
        return np.bincount(rows, weights=v, minlength=n)

    return rowsum(ferro * ak), rowsum(anti * ak), rowsum(ferro * bk), rowsum(anti * bk)


def gray_enumerate(w, tol):
    """Chunked brute force over all configurations with spin 0 pinned to +1.

    Same contract as the compiled Gray-code walk: returns the minimum energy
    and the sorted codes attaining it (bit ``k`` set means node ``k + 1`` is -1).
    """
    w = np.asarray(w, dtype=np.float64)
    n = w.shape[0]
    m = n - 1
    total = 1 << m
    shifts = np.arange(m, dtype=np.uint64)
    best = np.inf
    winners = []
    for start in range(0, total, _GRAY_CHUNK):
        codes = np.arange(start, min(start + _GRAY_CHUNK, total), dtype=np.uint64)
        bits = (codes[:, None] >> shifts) & np.uint64(1)
        spins = np.ones((codes.size, n))
        spins[:, 1:] -= 2.0 * bits
        energy = 0.5 * np.einsum("ij,ij->i", spins @ w, spins)
        lo = energy.min()
        if lo < best - tol:
            best = lo
            winners = []
        if lo <= best + tol:
            winners.append(codes[energy <= best + tol])
    out = np.concatenate(winners) if winners else np.zeros(0, dtype=np.uint64)
    out.sort()
    return float(best), out


def local_search(w, s_in, tol):
    w = np.asarray(w, dtype=np.float64)
    s = np.array(s_in, dtype=np.float64)
    h = w @ s
    flips = 0
    while True:
        gain = s * h
        i = int(np.argmax(gain))
        if gain[i] <= tol:
            break
        s[i] = -s[i]
        h += 2.0 * s[i] * w[i]
        flips += 1
    return s, flips
