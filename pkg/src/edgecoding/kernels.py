"""Batched per-trial kernels for the uncoded scheme.

Both backends return bit-identical results: stopping times are taken
verbatim from the event grid ``lambda_k + j*tau`` and the downlink sum is
accumulated over redundancy levels in ascending order.
"""

from __future__ import annotations

import numpy as np

from ._accel import HAVE_NUMBA, njit

_CHUNK = 4096


@njit(cache=True)
def _uc_batch_numba(lam, sched, m, tau, N):
    T, K = lam.shape
    C = sched.shape[1]
    tc = np.empty(T)
    mk = np.zeros((T, K), dtype=np.int64)
    dd = np.empty(T)
    ok = np.ones(T, dtype=np.bool_)
    times = np.empty(K * C)
    owner = np.empty(K * C, dtype=np.int64)
    slot = np.empty(K * C, dtype=np.int64)
    hits = np.zeros(m, dtype=np.int64)
    hist = np.zeros(K * C + 1, dtype=np.int64)
    for t in range(T):
        for k in range(K):
            for j in range(C):
                times[k * C + j] = lam[t, k] + (j + 1) * tau
                owner[k * C + j] = k
                slot[k * C + j] = j
        order = np.argsort(times, kind="mergesort")
        hits[:] = 0
        covered = 0
        stop = -1.0
        for e in range(K * C):
            idx = order[e]
            row = sched[owner[idx], slot[idx]]
            if hits[row] == 0:
                covered += 1
            hits[row] += 1
            if covered == m:
                stop = times[idx]
                break
        if stop < 0.0:
            ok[t] = False
            tc[t] = np.inf
            dd[t] = np.nan
            continue
        tc[t] = stop
        hits[:] = 0
        for k in range(K):
            n = 0
            for j in range(C):
                if lam[t, k] + (j + 1) * tau <= stop:
                    n += 1
                    hits[sched[k, j]] += 1
            mk[t, k] = n
        hist[:] = 0
        for i in range(m):
            hist[hits[i]] += 1
        acc = 0.0
        for r in range(1, K * C + 1):
            acc += hist[r] / min(r, N)
        dd[t] = acc
    return tc, mk, dd, ok


def _uc_batch_numpy(lam, sched, m, tau, N):
    T, K = lam.shape
    C = sched.shape[1]
    steps = np.arange(1, C + 1) * tau
    events = (lam[:, :, None] + steps[None, None, :]).reshape(T, K * C)
    onehot = np.zeros((K * C, m))
    onehot[np.arange(K * C), sched.reshape(-1)] = 1.0
    sorted_ev = np.sort(events, axis=1)

    def covers(t):
        hits = (events <= t[:, None]).astype(float) @ onehot
        return np.all(hits > 0, axis=1)

    ok = covers(sorted_ev[:, -1])
    lo = np.zeros(T, dtype=np.int64)
    hi = np.full(T, K * C - 1, dtype=np.int64)
    # first index whose event time makes the union of prefixes cover all rows
    while np.any(lo < hi):
        mid = (lo + hi) // 2
        good = covers(sorted_ev[np.arange(T), mid])
        hi = np.where(good, mid, hi)
        lo = np.where(good, lo, mid + 1)
    tc = sorted_ev[np.arange(T), lo]
    mask = events <= tc[:, None]
    mk = mask.reshape(T, K, C).sum(axis=2).astype(np.int64)
    hits = np.rint(mask.astype(float) @ onehot).astype(np.int64)
    dd = np.zeros(T)
    for r in range(1, int(hits.max(initial=0)) + 1):
        dd += (hits == r).sum(axis=1) / min(r, N)
    tc = np.where(ok, tc, np.inf)
    dd = np.where(ok, dd, np.nan)
    return tc, mk, dd, ok


def uc_batch(lam, sched, m, tau, N, backend: str | None = None):
    """Stopping time, stop vector and downlink delay for each row of ``lam``.

    Parameters
    ----------
    lam : (T, K) float array of setup times.
    sched : (K, C) int array of 0-based row indices (computing order).

    Returns
    -------
    tc : (T,) stopping times in seconds (``inf`` where infeasible).
    mk : (T, K) IVs completed at each EN by ``tc``.
    dd : (T,) normalized downlink delay, sum_i 1/min(r_i, N).
    ok : (T,) bool, False where the schedule never covers all rows.
    """
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    sched = np.ascontiguousarray(sched, dtype=np.int64)
    if backend is None:
        backend = "numba" if HAVE_NUMBA else "numpy"
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is disabled or missing")
        return _uc_batch_numba(lam, sched, int(m), float(tau), int(N))
    if backend == "numpy":
        parts = [
            _uc_batch_numpy(lam[i : i + _CHUNK], sched, int(m), float(tau), int(N))
            for i in range(0, max(len(lam), 1), _CHUNK)
        ]
        return tuple(np.concatenate(p) for p in zip(*parts))
    raise ValueError(f"unknown backend {backend!r}")
