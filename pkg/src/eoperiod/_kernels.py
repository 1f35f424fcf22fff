"""Integer elimination kernels for the Bredon oracle.

The oracle computes invariant factors of many small boundary matrices with
entries in {0, +-1, +-2, +-4}.  These kernels work in int64.  A numba
version is used when available; setting EOPERIOD_KERNEL=numpy forces the
vectorized numpy version.  Either one bails out (returns None) when an
entry grows past GUARD, and the caller falls back to exact Python ints.
"""

import os

import numpy as np

GUARD = 1 << 40

try:  # numba is optional
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None


def _smith_numpy(A):
    """Invariant factors (nonzero diagonal) of A; None on overflow risk."""
    A = np.array(A, dtype=np.int64, copy=True)
    rows, cols = A.shape
    diag = []
    t = 0
    while t < rows and t < cols:
        block = np.abs(A[t:, t:])
        nz = block > 0
        if not nz.any():
            break
        masked = np.where(nz, block, np.iinfo(np.int64).max)
        flat = int(np.argmin(masked))
        i, j = divmod(flat, cols - t)
        i += t
        j += t
        if i != t:
            A[[t, i]] = A[[i, t]]
        if j != t:
            A[:, [t, j]] = A[:, [j, t]]
        while True:
            p = A[t, t]
            col = A[t + 1:, t]
            if col.any():
                q = col // p
                A[t + 1:] -= np.outer(q, A[t])
                rem = A[t + 1:, t]
                if rem.any():
                    k = t + 1 + int(np.argmin(np.where(rem != 0, np.abs(rem), np.iinfo(np.int64).max)))
                    A[[t, k]] = A[[k, t]]
                    continue
            row = A[t, t + 1:]
            if row.any():
                q = row // A[t, t]
                A[:, t + 1:] -= np.outer(A[:, t], q)
                rem = A[t, t + 1:]
                if rem.any():
                    k = t + 1 + int(np.argmin(np.where(rem != 0, np.abs(rem), np.iinfo(np.int64).max)))
                    A[:, [t, k]] = A[:, [k, t]]
                    continue
            sub = A[t + 1:, t + 1:]
            bad = np.argwhere(sub % A[t, t] != 0)
            if len(bad):
                A[t] += A[t + 1 + bad[0][0]]
                continue
            break
        if np.abs(A).max() > GUARD:
            return None
        diag.append(abs(int(A[t, t])))
        t += 1
    return diag


if njit is not None:
    @njit(cache=True)
    def _smith_numba_impl(A):
        rows, cols = A.shape
        diag = np.zeros(min(rows, cols), dtype=np.int64)
        t = 0
        ok = True
        while t < rows and t < cols:
            pi = -1
            pj = -1
            best = 0
            for i in range(t, rows):
                for j in range(t, cols):
                    v = abs(A[i, j])
                    if v != 0 and (pi < 0 or v < best):
                        best = v
                        pi = i
                        pj = j
            if pi < 0:
                break
            if pi != t:
                for j in range(cols):
                    tmp = A[t, j]
                    A[t, j] = A[pi, j]
                    A[pi, j] = tmp
            if pj != t:
                for i in range(rows):
                    tmp = A[i, t]
                    A[i, t] = A[i, pj]
                    A[i, pj] = tmp
            while True:
                again = False
                for i in range(t + 1, rows):
                    if A[i, t] != 0:
                        q = A[i, t] // A[t, t]
                        for j in range(t, cols):
                            A[i, j] -= q * A[t, j]
                        if A[i, t] != 0:
                            for j in range(t, cols):
                                tmp = A[t, j]
                                A[t, j] = A[i, j]
                                A[i, j] = tmp
                            again = True
                for j in range(t + 1, cols):
                    if A[t, j] != 0:
                        q = A[t, j] // A[t, t]
                        for i in range(t, rows):
                            A[i, j] -= q * A[i, t]
                        if A[t, j] != 0:
                            for i in range(t, rows):
                                tmp = A[i, t]
                                A[i, t] = A[i, j]
                                A[i, j] = tmp
                            again = True
                if again:
                    continue
                bad = -1
                for i in range(t + 1, rows):
                    for j in range(t + 1, cols):
                        if A[i, j] % A[t, t] != 0:
                            bad = i
                            break
                    if bad >= 0:
                        break
                if bad < 0:
                    break
                for j in range(t, cols):
                    A[t, j] += A[bad, j]
            for i in range(t, rows):
                for j in range(t, cols):
                    if abs(A[i, j]) > 1099511627776:
                        ok = False
            if not ok:
                break
            diag[t] = abs(A[t, t])
            t += 1
        return diag[:t], ok


def backend():
    choice = os.environ.get("EOPERIOD_KERNEL", "numba").lower()
    if choice == "numba" and njit is not None:
        return "numba"
    return "numpy"


def smith_diagonal(M, kernel=None):
    """Nonzero invariant factors of an integer matrix (list of ints)."""
    A = np.asarray(M, dtype=np.int64)
    if A.size == 0 or A.ndim != 2:
        return []
    if np.abs(A).max() > GUARD:
        return _exact(M)
    kernel = kernel or backend()
    if kernel == "numba" and njit is not None:
        diag, ok = _smith_numba_impl(A.copy())
        out = [int(d) for d in diag] if ok else None
    else:
        out = _smith_numpy(A)
    if out is None:
        return _exact(M)
    return out


def _exact(M):
    from .lattice import snf_diagonal
    return snf_diagonal([[int(x) for x in row] for row in np.asarray(M).tolist()])
