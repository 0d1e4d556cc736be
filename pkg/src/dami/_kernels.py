"""Hot numeric loops: weighted moment sums and point-tuple covariant sums.

Each kernel has a numba ``@njit`` version and a pure-numpy version with the same
signature. The numba path is used unless ``DAMI_DISABLE_NUMBA=1`` is set or
numba cannot be imported. Both use a fixed summation order, so repeated runs
are bit-identical.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and os.environ.get("DAMI_DISABLE_NUMBA", "").lower() not in ("1", "true", "yes")

CHUNK = 1 << 16


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy path


def weighted_sums_numpy(data: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return np.array([math.fsum(col) for col in (data * weights[:, None]).T])


def moment_sums_numpy(data: np.ndarray, weights: np.ndarray, exps: np.ndarray) -> np.ndarray:
    """``out[k] = sum_i w_i prod_j data[i, j] ** exps[k, j]``."""
    exps = np.asarray(exps, dtype=np.int64)
    out = np.empty(exps.shape[0])
    if exps.shape[0] == 0:
        return out
    top = int(exps.max())
    powers = np.ones((top + 1,) + data.shape)
    for p in range(1, top + 1):
        powers[p] = powers[p - 1] * data
    cols = np.arange(data.shape[1])
    for k, e in enumerate(exps):
        terms = weights * np.prod(powers[e, :, cols].T, axis=1)
        out[k] = math.fsum(terms)
    return out


def _tuple_terms_numpy(space, chan, weights, kinds, pts, prim_exps, idx):
    vals = np.prod(weights[idx], axis=1)
    for kind, p, e in zip(kinds, pts, prim_exps):
        src = space if kind == 0 else chan
        arity = src.shape[1]
        mats = src[idx[:, p[:arity]]]  # (chunk, points, axes)
        vals = vals * np.linalg.det(mats) ** e
    return vals


def tuple_sum_numpy(space, chan, weights, kinds, pts, prim_exps, n_slots, tuples=None):
    """Sum over point tuples of the weighted kernel product; returns ``(sum, sum of |terms|)``.

    ``tuples=None`` runs over all ``n ** n_slots`` ordered tuples with repetition.
    """
    n = space.shape[0]
    parts, abs_parts = [], []
    if tuples is None:
        total = n ** n_slots
        for start in range(0, total, CHUNK):
            flat = np.arange(start, min(start + CHUNK, total))
            idx = np.stack(np.unravel_index(flat, (n,) * n_slots), axis=1)
            v = _tuple_terms_numpy(space, chan, weights, kinds, pts, prim_exps, idx)
            parts.append(math.fsum(v))
            abs_parts.append(math.fsum(np.abs(v)))
    else:
        for start in range(0, len(tuples), CHUNK):
            v = _tuple_terms_numpy(space, chan, weights, kinds, pts, prim_exps, tuples[start:start + CHUNK])
            parts.append(math.fsum(v))
            abs_parts.append(math.fsum(np.abs(v)))
    return math.fsum(parts), math.fsum(abs_parts)


# ---------------------------------------------------------------------------
# numba path

if NUMBA_AVAILABLE:
    njit = numba.njit(cache=False, nogil=True)

    @njit
    def _neumaier_add(s, c, x):
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        return t, c

    @njit
    def weighted_sums_numba(data, weights):
        n, d = data.shape
        out = np.empty(d)
        for j in range(d):
            s = 0.0
            c = 0.0
            for i in range(n):
                s, c = _neumaier_add(s, c, weights[i] * data[i, j])
            out[j] = s + c
        return out

    @njit
    def moment_sums_numba(data, weights, exps):
        n, d = data.shape
        K = exps.shape[0]
        out = np.empty(K)
        for k in range(K):
            s = 0.0
            c = 0.0
            for i in range(n):
                v = weights[i]
                for j in range(d):
                    e = exps[k, j]
                    for _ in range(e):
                        v *= data[i, j]
                s, c = _neumaier_add(s, c, v)
            out[k] = s + c
        return out

    @njit
    def _det(a):
        m = a.shape[0]
        a = a.copy()
        det = 1.0
        for col in range(m):
            piv = col
            best = abs(a[col, col])
            for r in range(col + 1, m):
                if abs(a[r, col]) > best:
                    best = abs(a[r, col])
                    piv = r
            if best == 0.0:
                return 0.0
            if piv != col:
                for j in range(m):
                    tmp = a[col, j]
                    a[col, j] = a[piv, j]
                    a[piv, j] = tmp
                det = -det
            det *= a[col, col]
            for r in range(col + 1, m):
                f = a[r, col] / a[col, col]
                for j in range(col, m):
                    a[r, j] -= f * a[col, j]
        return det

    @njit
    def _tuple_term(space, chan, weights, kinds, pts, prim_exps, tup, buf_s, buf_c):
        v = 1.0
        for s in range(tup.shape[0]):
            v *= weights[tup[s]]
        for q in range(kinds.shape[0]):
            if kinds[q] == 0:
                src, buf = space, buf_s
            else:
                src, buf = chan, buf_c
            arity = src.shape[1]
            for col in range(arity):
                pid = tup[pts[q, col]]
                for ax in range(arity):
                    buf[col, ax] = src[pid, ax]
            dv = _det(buf)
            for _ in range(prim_exps[q]):
                v *= dv
        return v

    @njit
    def _tuple_sum_exhaustive(space, chan, weights, kinds, pts, prim_exps, n_slots):
        n = space.shape[0]
        buf_s = np.empty((space.shape[1], space.shape[1]))
        buf_c = np.empty((chan.shape[1], chan.shape[1]))
        tup = np.zeros(n_slots, dtype=np.int64)
        s = 0.0
        c = 0.0
        a = 0.0
        ca = 0.0
        while True:
            v = _tuple_term(space, chan, weights, kinds, pts, prim_exps, tup, buf_s, buf_c)
            s, c = _neumaier_add(s, c, v)
            a, ca = _neumaier_add(a, ca, abs(v))
            pos = n_slots - 1
            while pos >= 0:
                tup[pos] += 1
                if tup[pos] < n:
                    break
                tup[pos] = 0
                pos -= 1
            if pos < 0:
                break
        return s + c, a + ca

    @njit
    def _tuple_sum_listed(space, chan, weights, kinds, pts, prim_exps, tuples):
        buf_s = np.empty((space.shape[1], space.shape[1]))
        buf_c = np.empty((chan.shape[1], chan.shape[1]))
        s = 0.0
        c = 0.0
        a = 0.0
        ca = 0.0
        for r in range(tuples.shape[0]):
            v = _tuple_term(space, chan, weights, kinds, pts, prim_exps, tuples[r], buf_s, buf_c)
            s, c = _neumaier_add(s, c, v)
            a, ca = _neumaier_add(a, ca, abs(v))
        return s + c, a + ca

    def tuple_sum_numba(space, chan, weights, kinds, pts, prim_exps, n_slots, tuples=None):
        if tuples is None:
            return _tuple_sum_exhaustive(space, chan, weights, kinds, pts, prim_exps, n_slots)
        return _tuple_sum_listed(space, chan, weights, kinds, pts, prim_exps, np.ascontiguousarray(tuples))

else:  # pragma: no cover
    weighted_sums_numba = weighted_sums_numpy
    moment_sums_numba = moment_sums_numpy
    tuple_sum_numba = tuple_sum_numpy


def _prep(*arrays):
    return tuple(np.ascontiguousarray(a) for a in arrays)


def weighted_sums(data: np.ndarray, weights: np.ndarray) -> np.ndarray:
    data, weights = _prep(np.asarray(data, np.float64), np.asarray(weights, np.float64))
    fn = weighted_sums_numba if USE_NUMBA else weighted_sums_numpy
    return fn(data, weights)


def moment_sums(data: np.ndarray, weights: np.ndarray, exps: np.ndarray) -> np.ndarray:
    data, weights, exps = _prep(np.asarray(data, np.float64), np.asarray(weights, np.float64),
                                np.asarray(exps, np.int64).reshape(-1, data.shape[1]))
    fn = moment_sums_numba if USE_NUMBA else moment_sums_numpy
    return fn(data, weights, exps)


def tuple_sum(space, chan, weights, kinds, pts, prim_exps, n_slots, tuples=None):
    args = _prep(np.asarray(space, np.float64), np.asarray(chan, np.float64),
                 np.asarray(weights, np.float64), np.asarray(kinds, np.int64),
                 np.asarray(pts, np.int64), np.asarray(prim_exps, np.int64))
    fn = tuple_sum_numba if USE_NUMBA else tuple_sum_numpy
    if tuples is not None:
        tuples = np.ascontiguousarray(tuples, dtype=np.int64)
    return fn(*args, n_slots, tuples)
