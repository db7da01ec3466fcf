"""Integer kernels for the O(n^2)..O(n^3) scans.

Every kernel works on int64 distance matrices that have been scaled by the
common denominator of the underlying rationals, so results are exact.
Ratios are compared by cross multiplication; callers guarantee entries stay
below ``SAFE_MAX`` so products never overflow.

Two implementations are kept side by side: numba ``@njit`` loops and a
vectorised numpy fallback.  Set ``PERIMFIX_DISABLE_NUMBA=1`` (or run without
numba installed) to select the fallback.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

# 9 * SAFE_MAX**2 must fit in int64 (perimeter cross products).
SAFE_MAX = 1 << 28


def _numba_disabled() -> bool:
    return os.environ.get("PERIMFIX_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")


# ---------------------------------------------------------------------------
# numpy fallback
# ---------------------------------------------------------------------------


def _np_hausdorff_matrix(dist, member):
    n = dist.shape[0]
    big = np.iinfo(np.int64).max
    # to_image[a, j] = min over b in T_j of dist[a, b]
    masked = np.where(member[None, :, :], dist[:, None, :], big)
    to_image = masked.min(axis=2)
    # directed[i, j] = max over a in T_i of to_image[a, j]
    directed = np.where(member[:, :, None], to_image[None, :, :], -1).max(axis=1)
    out = np.maximum(directed, directed.T)
    out[np.arange(n), np.arange(n)] = 0
    return out


def _exact_argmax(num, den):
    """Index of the first maximal num/den, compared exactly."""
    if num.size == 0:
        return -1
    best = int(np.argmax(num / den))
    while True:
        better = num * den[best] > num[best] * den
        if not better.any():
            break
        best = int(np.flatnonzero(better)[0])
    ties = num * den[best] == num[best] * den
    return int(np.flatnonzero(ties)[0])


def _np_max_pair_ratio(dist, haus):
    n = dist.shape[0]
    i, j = np.triu_indices(n, 1)
    k = _exact_argmax(haus[i, j], dist[i, j])
    if k < 0:
        return -1, -1
    return int(i[k]), int(j[k])


def _triplets(n):
    idx = np.arange(n)
    i, j, k = np.meshgrid(idx, idx, idx, indexing="ij")
    keep = (i < j) & (j < k)
    return i[keep], j[keep], k[keep]


def _np_max_triplet_ratio(dist, haus):
    i, j, k = _triplets(dist.shape[0])
    num = haus[i, j] + haus[j, k] + haus[i, k]
    den = dist[i, j] + dist[j, k] + dist[i, k]
    t = _exact_argmax(num, den)
    if t < 0:
        return -1, -1, -1
    return int(i[t]), int(j[t]), int(k[t])


def _np_metric_closure(weights):
    d = weights.copy()
    for k in range(d.shape[0]):
        d = np.minimum(d, d[:, k, None] + d[None, k, :])
    return d


# ---------------------------------------------------------------------------
# numba
# ---------------------------------------------------------------------------


def _build_numba():
    from numba import njit

    @njit(cache=True)
    def hausdorff_matrix(dist, member):
        n = dist.shape[0]
        to_image = np.empty((n, n), dtype=np.int64)
        for a in range(n):
            for j in range(n):
                m = np.iinfo(np.int64).max
                for b in range(n):
                    if member[j, b] and dist[a, b] < m:
                        m = dist[a, b]
                to_image[a, j] = m
        out = np.zeros((n, n), dtype=np.int64)
        for i in range(n):
            for j in range(i + 1, n):
                h = 0
                for a in range(n):
                    if member[i, a] and to_image[a, j] > h:
                        h = to_image[a, j]
                    if member[j, a] and to_image[a, i] > h:
                        h = to_image[a, i]
                out[i, j] = h
                out[j, i] = h
        return out

    @njit(cache=True)
    def max_pair_ratio(dist, haus):
        n = dist.shape[0]
        bi, bj = -1, -1
        bn, bd = 0, 1
        for i in range(n):
            for j in range(i + 1, n):
                num = haus[i, j]
                den = dist[i, j]
                if bi < 0 or num * bd > bn * den:
                    bi, bj, bn, bd = i, j, num, den
        return bi, bj

    @njit(cache=True)
    def max_triplet_ratio(dist, haus):
        n = dist.shape[0]
        bi, bj, bk = -1, -1, -1
        bn, bd = 0, 1
        for i in range(n):
            for j in range(i + 1, n):
                hij = haus[i, j]
                dij = dist[i, j]
                for k in range(j + 1, n):
                    num = hij + haus[j, k] + haus[i, k]
                    den = dij + dist[j, k] + dist[i, k]
                    if bi < 0 or num * bd > bn * den:
                        bi, bj, bk, bn, bd = i, j, k, num, den
        return bi, bj, bk

    @njit(cache=True)
    def metric_closure(weights):
        d = weights.copy()
        n = d.shape[0]
        for k in range(n):
            for i in range(n):
                dik = d[i, k]
                for j in range(n):
                    if dik + d[k, j] < d[i, j]:
                        d[i, j] = dik + d[k, j]
        return d

    return SimpleNamespace(
        name="numba",
        hausdorff_matrix=hausdorff_matrix,
        max_pair_ratio=max_pair_ratio,
        max_triplet_ratio=max_triplet_ratio,
        metric_closure=metric_closure,
    )


numpy_kernels = SimpleNamespace(
    name="numpy",
    hausdorff_matrix=_np_hausdorff_matrix,
    max_pair_ratio=_np_max_pair_ratio,
    max_triplet_ratio=_np_max_triplet_ratio,
    metric_closure=_np_metric_closure,
)

try:
    numba_kernels = _build_numba()
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_kernels = None

active = numpy_kernels if (numba_kernels is None or _numba_disabled()) else numba_kernels
BACKEND = active.name

hausdorff_matrix = active.hausdorff_matrix
max_pair_ratio = active.max_pair_ratio
max_triplet_ratio = active.max_triplet_ratio
metric_closure = active.metric_closure
