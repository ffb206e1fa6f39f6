"""Compiled per-node kernels for the tree grower.

These mirror the vectorized numpy implementations in tree.py but run the
split scan as the literal incremental formulation: moving one example
from the right accumulator to the left costs a handful of scalar updates.
numba is optional; when it is missing the grower falls back to numpy.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the fallback flag
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def select_pair(labels, probs, ids, first_order, eps):
    """Class pair for one node from its member statistics.

    Ties resolve to the lowest class index; degenerate second-order
    denominators are skipped.
    """
    k = probs.shape[1]
    residual = np.zeros(k)
    prob_sum = np.zeros(k)
    prob_sq = np.zeros(k)
    for i in ids:
        residual[labels[i]] += 1.0
        for c in range(k):
            p = probs[i, c]
            residual[c] -= p
            prob_sum[c] += p
            prob_sq[c] += p * p
    r = 0
    for c in range(1, k):
        if residual[c] > residual[r]:
            r = c
    if first_order:
        s = 1 if r == 0 else 0
        for c in range(k):
            if c != r and residual[c] < residual[s]:
                s = c
        return r, s
    cross = np.zeros(k)
    for i in ids:
        pr = probs[i, r]
        for c in range(k):
            cross[c] += pr * probs[i, c]
    diag_r = prob_sum[r] - prob_sq[r]
    s = 1 if r == 0 else 0
    best = -np.inf
    for c in range(k):
        if c == r:
            continue
        denom = diag_r + prob_sum[c] - prob_sq[c] + 2.0 * cross[c]
        if denom > eps:
            score = (residual[r] - residual[c]) ** 2 / denom
            if score > best:
                best = score
                s = c
    return r, s


@njit(cache=True)
def pair_workload(labels, probs, ids, r, s, a_buf, b_buf):
    """Scatter per-example pair contributions; returns (g_total, h_total)."""
    a_sum = 0.0
    b_sum = 0.0
    for i in ids:
        pr = probs[i, r]
        ps = probs[i, s]
        a = ps - pr
        if labels[i] == r:
            a += 1.0
        elif labels[i] == s:
            a -= 1.0
        b = pr * (1.0 - pr) + ps * (1.0 - ps) + 2.0 * pr * ps
        a_buf[i] = a
        b_buf[i] = b
        a_sum += a
        b_sum += b
    return -a_sum, b_sum


@njit(cache=True)
def scalar_workload(labels, probs, ids, cls, a_buf, b_buf):
    """Single-class (diagonal curvature) contributions."""
    a_sum = 0.0
    b_sum = 0.0
    for i in ids:
        p = probs[i, cls]
        a = 1.0 - p if labels[i] == cls else -p
        b = p * (1.0 - p)
        a_buf[i] = a
        b_buf[i] = b
        a_sum += a
        b_sum += b
    return -a_sum, b_sum


@njit(cache=True)
def partition(sorted_ids, in_left, n_left):
    """Split every per-feature sorted row by membership, preserving order."""
    n_features, n = sorted_ids.shape
    left = np.empty((n_features, n_left), dtype=np.int32)
    right = np.empty((n_features, n - n_left), dtype=np.int32)
    for f in range(n_features):
        li = 0
        ri = 0
        for j in range(n):
            i = sorted_ids[f, j]
            if in_left[i]:
                left[f, li] = i
                li += 1
            else:
                right[f, ri] = i
                ri += 1
    return left, right


@njit(cache=True)
def route(feature, threshold, left, right, x):
    """Leaf index per row of ``x``; negative feature marks a leaf."""
    n = x.shape[0]
    out = np.empty(n, dtype=np.int32)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if x[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


@njit(cache=True)
def scan(cols, sorted_ids, a_buf, b_buf, g_total, h_total, min_node, eps, parent_gain):
    """Best boundary over all features by one incremental left-to-right walk.

    Returns (feature, boundary, gain); feature is -1 when no boundary has
    positive gain.  Ties keep the first maximum in scan order, which is the
    lowest feature index and then the lowest threshold.
    """
    n_features, n = sorted_ids.shape
    best_gain = 0.0
    best_f = -1
    best_j = -1
    for f in range(n_features):
        ga = 0.0
        hb = 0.0
        row = sorted_ids[f]
        col = cols[f]
        v_next = col[row[0]]
        for j in range(n - 1):
            i = row[j]
            ga += a_buf[i]
            hb += b_buf[i]
            v = v_next
            v_next = col[row[j + 1]]
            if j + 1 < min_node or n - j - 1 < min_node:
                continue
            if v_next <= v:
                continue
            gl = -ga
            hl = hb
            gr = g_total - gl
            hr = h_total - hl
            gain = -parent_gain
            if hl > eps:
                gain += gl * gl / (2.0 * hl)
            if hr > eps:
                gain += gr * gr / (2.0 * hr)
            if gain > best_gain:
                best_gain = gain
                best_f = f
                best_j = j
    return best_f, best_j, best_gain
