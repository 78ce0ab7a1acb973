"""Hot numeric kernels, each in a numba loop form and a vectorised numpy form.

All kernels work on 0-based indices: ``D`` is the (n, n) distance matrix,
``w`` the (n,) demand vector and ``masks`` a (c, n) boolean matrix whose rows
are candidate facility sets. Zero-demand nodes never contribute, so an
unreachable zero-demand node costs 0 rather than ``0 * inf``.

The public names (``ship_costs`` ...) resolve to the numba variants unless
``RFTFL_DISABLE_NUMBA`` is set; both variants stay importable for the
cross-check tests and the benchmark.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from ._accel import USE_NUMBA, njit

# upper bound on float64 temporaries allocated per numpy chunk
_CHUNK = 1 << 21


def as_masks(masks) -> np.ndarray:
    m = np.ascontiguousarray(masks, dtype=np.bool_)
    if m.ndim == 1:
        m = m[None, :]
    return m


# ---------------------------------------------------------------------------
# ship_costs: sum_v w(v) * d(v, R) for every row R of ``masks``
# ---------------------------------------------------------------------------


@njit
def _ship_costs_nb(D, w, masks):
    c, n = masks.shape
    out = np.empty(c)
    for s in range(c):
        total = 0.0
        for v in range(n):
            if w[v] <= 0.0:
                continue
            best = np.inf
            for u in range(n):
                if masks[s, u] and D[v, u] < best:
                    best = D[v, u]
            total += w[v] * best
        out[s] = total
    return out


def _ship_costs_np(D, w, masks):
    c = masks.shape[0]
    pos = w > 0.0
    Dp = D[pos]
    wp = w[pos]
    out = np.zeros(c)
    if wp.size == 0:
        return out
    step = max(1, _CHUNK // Dp.size)
    for lo in range(0, c, step):
        m = masks[lo : lo + step]
        near = np.where(m[:, None, :], Dp[None, :, :], np.inf).min(axis=2)
        out[lo : lo + step] = (near * wp).sum(axis=1)
    return out


# ---------------------------------------------------------------------------
# kth_backup_values: max_{r in servers} w(r) * (k-th smallest d(r, u), u in R, u != r)
# ---------------------------------------------------------------------------


@njit
def _kth_backup_values_nb(D, w, servers, masks, k):
    c, n = masks.shape
    out = np.zeros(c)
    low = np.empty(k)  # k smallest distances seen so far, ascending
    for s in range(c):
        worst = 0.0
        for i in range(servers.shape[0]):
            r = servers[i]
            if w[r] <= 0.0:
                continue
            low[:] = np.inf
            for u in range(n):
                if masks[s, u] and u != r:
                    x = D[r, u]
                    j = k - 1
                    if x >= low[j]:
                        continue
                    while j > 0 and low[j - 1] > x:
                        low[j] = low[j - 1]
                        j -= 1
                    low[j] = x
            val = w[r] * low[k - 1]
            if val > worst:
                worst = val
        out[s] = worst
    return out


def _kth_backup_values_np(D, w, servers, masks, k):
    c, n = masks.shape
    out = np.zeros(c)
    servers = servers[w[servers] > 0.0]
    if servers.size == 0:
        return out
    if k > n:
        out[:] = np.inf
        return out
    ws = w[servers]
    sub = D[servers]
    not_self = np.arange(n)[None, :] != servers[:, None]
    step = max(1, _CHUNK // sub.size)
    for lo in range(0, c, step):
        m = masks[lo : lo + step]
        vals = np.where(m[:, None, :] & not_self[None], sub[None], np.inf)
        kth = np.partition(vals, k - 1, axis=2)[:, :, k - 1]
        out[lo : lo + step] = (kth * ws).max(axis=1)
    return out


# ---------------------------------------------------------------------------
# alpha_backup_values: max over failure sets F of the pool (|F| = min(alpha, |pool|))
# of sum_{r in F, r a server} w(r) * d(r, pool \ F)
# ---------------------------------------------------------------------------


@njit
def _alpha_backup_values_nb(D, w, is_server, masks, alpha):
    c, n = masks.shape
    out = np.zeros(c)
    pool = np.empty(n, dtype=np.int64)
    failed = np.zeros(n, dtype=np.bool_)
    idx = np.empty(n, dtype=np.int64)
    for s in range(c):
        p = 0
        for u in range(n):
            if masks[s, u]:
                pool[p] = u
                p += 1
        a = min(alpha, p)
        if a == 0:
            continue
        for j in range(a):
            idx[j] = j
        worst = 0.0
        while True:
            for j in range(a):
                failed[pool[idx[j]]] = True
            total = 0.0
            for j in range(a):
                r = pool[idx[j]]
                if not is_server[r] or w[r] <= 0.0:
                    continue
                best = np.inf
                for q in range(p):
                    u = pool[q]
                    if not failed[u] and D[r, u] < best:
                        best = D[r, u]
                total += w[r] * best
            for j in range(a):
                failed[pool[idx[j]]] = False
            if total > worst:
                worst = total
            if worst == np.inf:
                break
            # next combination in lexicographic order
            i = a - 1
            while i >= 0 and idx[i] == p - a + i:
                i -= 1
            if i < 0:
                break
            idx[i] += 1
            for j in range(i + 1, a):
                idx[j] = idx[j - 1] + 1
        out[s] = worst
    return out


def _alpha_backup_values_np(D, w, is_server, masks, alpha):
    c = masks.shape[0]
    out = np.zeros(c)
    for s in range(c):
        pool = np.flatnonzero(masks[s])
        p = pool.size
        a = min(alpha, p)
        if a == 0:
            continue
        combos = np.array(list(combinations(range(p), a)), dtype=np.int64)
        failed = np.zeros((combos.shape[0], p), dtype=np.bool_)
        np.put_along_axis(failed, combos, True, axis=1)
        sub = D[np.ix_(pool, pool)]
        near = np.where(~failed[:, None, :], sub[None, :, :], np.inf).min(axis=2)
        wp = w[pool]
        charged = failed & is_server[pool][None, :] & (wp > 0.0)[None, :]
        out[s] = (np.where(charged, near, 0.0) * wp).sum(axis=1).max()
    return out


BACKENDS = {
    "numba": {
        "ship_costs": _ship_costs_nb,
        "kth_backup_values": _kth_backup_values_nb,
        "alpha_backup_values": _alpha_backup_values_nb,
    },
    "numpy": {
        "ship_costs": _ship_costs_np,
        "kth_backup_values": _kth_backup_values_np,
        "alpha_backup_values": _alpha_backup_values_np,
    },
}

_active = BACKENDS["numba" if USE_NUMBA else "numpy"]


def ship_costs(D: np.ndarray, w: np.ndarray, masks) -> np.ndarray:
    """Demand-weighted distance to the nearest member, one value per mask row."""
    return _active["ship_costs"](D, w, as_masks(masks))


def kth_backup_values(D: np.ndarray, w: np.ndarray, servers: np.ndarray, masks, k: int) -> np.ndarray:
    """Worst server reroute cost when each server loses itself and its k-1 nearest peers.

    ``k = 1`` gives the single-failure backup cost.
    """
    servers = np.ascontiguousarray(servers, dtype=np.int64)
    return _active["kth_backup_values"](D, w, servers, as_masks(masks), int(k))


def alpha_backup_values(D: np.ndarray, w: np.ndarray, is_server: np.ndarray, masks, alpha: int) -> np.ndarray:
    """Worst summed reroute cost of failed servers over all alpha-failures of each pool."""
    is_server = np.ascontiguousarray(is_server, dtype=np.bool_)
    return _active["alpha_backup_values"](D, w, is_server, as_masks(masks), int(alpha))
