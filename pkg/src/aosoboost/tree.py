"""Vector regression trees grown best-first over presorted features.

Each leaf stores a sparse sum-to-zero update: +t for one class, -t for
another (or a single-class scalar t for the diagonal-Hessian baseline).
Split search walks every feature in ascending value order and evaluates
the pair gain at each boundary between distinct values; the walk is the
incremental left/right statistics update expressed as prefix sums so the
whole scan is a handful of vectorized passes.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .pairs import (
    DEGENERATE_EPS,
    NodeStats,
    select_pair_first_order,
    select_pair_second_order,
    solve_pair,
)

LEAF = -1
NO_CLASS = -1  # pair_second sentinel for single-class (diagonal) leaves

# Cap on elements per scan block so temporaries stay small on wide data.
_SCAN_BLOCK_ELEMS = 1 << 20


@dataclass
class SplitCandidate:
    """Best boundary found for one node."""

    feature: int
    threshold: float
    gain: float
    boundary: int  # sorted positions [0..boundary] go left
    left_count: int
    right_count: int


@dataclass
class Tree:
    """Flat binary tree; root at index 0, feature == LEAF marks leaves."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    pair_first: np.ndarray
    pair_second: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    def is_leaf(self, node: int) -> bool:
        return self.feature[node] == LEAF

    def leaf_for(self, x: np.ndarray) -> int:
        """Route one example; values equal to a threshold go left."""
        node = 0
        while self.feature[node] != LEAF:
            if x[self.feature[node]] <= self.threshold[node]:
                node = self.left[node]
            else:
                node = self.right[node]
        return node

    def route(self, features: np.ndarray) -> np.ndarray:
        """Leaf node index for every row of ``features``."""
        if _kernels.HAVE_NUMBA:
            return _kernels.route(
                self.feature, self.threshold, self.left, self.right,
                np.ascontiguousarray(features, dtype=np.float64),
            )
        n = features.shape[0]
        out = np.empty(n, dtype=np.int32)
        stack = [(0, np.arange(n))]
        while stack:
            node, idx = stack.pop()
            if self.feature[node] == LEAF:
                out[idx] = node
                continue
            go_left = features[idx, self.feature[node]] <= self.threshold[node]
            left_idx = idx[go_left]
            right_idx = idx[~go_left]
            if left_idx.size:
                stack.append((self.left[node], left_idx))
            if right_idx.size:
                stack.append((self.right[node], right_idx))
        return out

    def leaf_vector(self, node: int, n_classes: int) -> np.ndarray:
        """Dense K-vector for a leaf's sparse update."""
        v = np.zeros(n_classes)
        v[self.pair_first[node]] += self.value[node]
        if self.pair_second[node] != NO_CLASS:
            v[self.pair_second[node]] -= self.value[node]
        return v

    def add_to_scores(
        self, scores: np.ndarray, leaves: np.ndarray, shrinkage: float
    ) -> None:
        """Accumulate shrunken leaf updates into an (N, K) score matrix."""
        rows = np.arange(scores.shape[0])
        t = shrinkage * self.value[leaves]
        scores[rows, self.pair_first[leaves]] += t
        paired = self.pair_second[leaves] != NO_CLASS
        scores[rows[paired], self.pair_second[leaves][paired]] -= t[paired]

    def max_abs_value(self) -> float:
        leaf_vals = self.value[self.feature == LEAF]
        return float(np.max(np.abs(leaf_vals))) if leaf_vals.size else 0.0


@dataclass
class _NodeWork:
    node: int
    ids: np.ndarray        # member example indices
    sorted_ids: np.ndarray  # (D, n) member indices in per-feature sorted order
    pair: tuple[int, int]
    g: float
    h: float
    candidate: SplitCandidate | None


class TreeGrower:
    """Grows one tree per call against the current probability matrix.

    The per-node class pair is re-selected from that node's statistics
    unless a fixed pair (the ABC baseline) or a single class (the diagonal
    baseline) is requested; everything else is shared across the modes.
    """

    def __init__(
        self,
        features: np.ndarray,
        sorted_index: np.ndarray,
        labels: np.ndarray,
        n_classes: int,
        *,
        n_leaves: int,
        min_node_size: int = 1,
        pair_rule: str = "second_order",
        threshold_mode: str = "midpoint",
        eps: float = DEGENERATE_EPS,
    ):
        if pair_rule not in ("first_order", "second_order"):
            raise ValueError("unknown pair rule %r" % pair_rule)
        if threshold_mode not in ("midpoint", "left"):
            raise ValueError("unknown threshold mode %r" % threshold_mode)
        self._features = np.asfortranarray(features, dtype=np.float64)
        self._cols = self._features.T  # (D, N), C-contiguous rows
        self._sorted = np.ascontiguousarray(sorted_index, dtype=np.int32)
        self._labels = np.asarray(labels, dtype=np.int32)
        self.n_classes = int(n_classes)
        self.n_leaves = int(n_leaves)
        self.min_node_size = int(min_node_size)
        self.pair_rule = pair_rule
        self.threshold_mode = threshold_mode
        self.eps = float(eps)
        # compiled kernels when numba is present; the numpy path is kept as
        # a fallback and as the reference the kernels are tested against
        self.use_kernels = _kernels.HAVE_NUMBA
        n = self._features.shape[0]
        self._abuf = np.zeros(n)
        self._bbuf = np.zeros(n)
        self._membuf = np.zeros(n, dtype=bool)

    # -- node setup ----------------------------------------------------

    def _select_pair(self, stats: NodeStats) -> tuple[int, int]:
        if self.pair_rule == "first_order":
            return select_pair_first_order(stats)
        return select_pair_second_order(stats, self.eps)

    def _workload(
        self,
        ids: np.ndarray,
        probs: np.ndarray,
        fixed_pair: tuple[int, int] | None,
        scalar_class: int | None,
    ) -> tuple[tuple[int, int], np.ndarray, np.ndarray]:
        """Per-example gradient/curvature contributions for the node's pair."""
        labels = self._labels[ids]
        if scalar_class is not None:
            k = scalar_class
            pk = probs[ids, k]
            a = (labels == k).astype(np.float64) - pk
            b = pk * (1.0 - pk)
            return (k, NO_CLASS), a, b
        if fixed_pair is not None:
            r, s = fixed_pair
        else:
            stats = NodeStats.from_examples(labels, probs[ids])
            r, s = self._select_pair(stats)
        pr = probs[ids, r]
        ps = probs[ids, s]
        a = ((labels == r).astype(np.float64) - pr) - (
            (labels == s).astype(np.float64) - ps
        )
        b = pr * (1.0 - pr) + ps * (1.0 - ps) + 2.0 * pr * ps
        return (r, s), a, b

    def _make_work(
        self,
        node: int,
        ids: np.ndarray,
        sorted_ids: np.ndarray,
        probs: np.ndarray,
        fixed_pair: tuple[int, int] | None,
        scalar_class: int | None,
    ) -> _NodeWork:
        if self.use_kernels:
            if scalar_class is not None:
                pair = (scalar_class, NO_CLASS)
                g, h = _kernels.scalar_workload(
                    self._labels, probs, ids, scalar_class, self._abuf, self._bbuf
                )
            else:
                if fixed_pair is None:
                    pair = _kernels.select_pair(
                        self._labels, probs, ids,
                        self.pair_rule == "first_order", self.eps,
                    )
                else:
                    pair = fixed_pair
                g, h = _kernels.pair_workload(
                    self._labels, probs, ids, pair[0], pair[1],
                    self._abuf, self._bbuf,
                )
        else:
            pair, a, b = self._workload(ids, probs, fixed_pair, scalar_class)
            g = float(-a.sum())
            h = float(b.sum())
            self._abuf[ids] = a
            self._bbuf[ids] = b
        candidate = self._scan(sorted_ids, g, h)
        return _NodeWork(node, ids, sorted_ids, pair, g, h, candidate)

    # -- split search ----------------------------------------------------

    def _scan(
        self, sorted_ids: np.ndarray, g_total: float, h_total: float
    ) -> SplitCandidate | None:
        """Best boundary over all features; expects _abuf/_bbuf scattered."""
        n = sorted_ids.shape[1]
        mn = self.min_node_size
        if n < 2 * mn:
            return None
        parent = solve_pair(g_total, h_total, self.eps).gain
        if self.use_kernels:
            best_feature, best_j, best_gain = _kernels.scan(
                self._cols, sorted_ids, self._abuf, self._bbuf,
                g_total, h_total, mn, self.eps, parent,
            )
            best_gain = float(best_gain)
        else:
            best_feature, best_j, best_gain = self._scan_numpy(
                sorted_ids, g_total, h_total, parent
            )
        if best_feature < 0:
            return None
        order = sorted_ids[best_feature]
        col = self._cols[best_feature]
        v_lo = col[order[best_j]]
        v_hi = col[order[best_j + 1]]
        if self.threshold_mode == "left":
            # quantized data: the left value is the raw bin's upper bound
            thr = v_lo
        else:
            thr = v_lo + 0.5 * (v_hi - v_lo)
            if not (v_lo <= thr < v_hi):  # adjacent floats can round the midpoint up
                thr = v_lo
        return SplitCandidate(
            feature=best_feature,
            threshold=float(thr),
            gain=best_gain,
            boundary=best_j,
            left_count=best_j + 1,
            right_count=n - best_j - 1,
        )

    def _scan_numpy(
        self, sorted_ids: np.ndarray, g_total: float, h_total: float, parent: float
    ) -> tuple[int, int, float]:
        n = sorted_ids.shape[1]
        mn = self.min_node_size
        lo, hi = mn - 1, n - mn  # candidate boundaries are [lo, hi)
        width = hi - lo
        block = max(1, _SCAN_BLOCK_ELEMS // max(n, 1))
        best_gain = 0.0
        best_feature = -1
        best_j = -1
        for f0 in range(0, sorted_ids.shape[0], block):
            sm = sorted_ids[f0 : f0 + block]
            vals = np.take_along_axis(self._cols[f0 : f0 + sm.shape[0]], sm, axis=1)
            ca = np.cumsum(self._abuf[sm], axis=1)
            cb = np.cumsum(self._bbuf[sm], axis=1)
            gl = -ca[:, lo:hi]
            hl = cb[:, lo:hi]
            gr = g_total - gl
            hr = h_total - hl
            gains = self._gain_terms(gl, hl) + self._gain_terms(gr, hr) - parent
            gains[vals[:, lo + 1 : hi + 1] <= vals[:, lo:hi]] = -np.inf
            flat = int(np.argmax(gains))
            gain = gains.flat[flat]
            if gain > best_gain:
                best_gain = float(gain)
                best_feature = f0 + flat // width
                best_j = lo + flat % width
        return best_feature, best_j, best_gain

    def _gain_terms(self, g: np.ndarray, h: np.ndarray) -> np.ndarray:
        out = np.zeros_like(g)
        np.divide(g * g, 2.0 * h, out=out, where=h > self.eps)
        return out

    # -- public hooks (used by tests and the trainers) --------------------

    def best_split_for(
        self,
        ids: np.ndarray,
        probs: np.ndarray,
        pair: tuple[int, int],
        scalar_class: int | None = None,
    ) -> SplitCandidate | None:
        """Split search for an explicit node with an already-chosen pair."""
        ids = np.asarray(ids, dtype=np.int32)
        sorted_ids = self._filter_sorted(ids)
        fixed = None if scalar_class is not None else pair
        work = self._make_work(0, ids, sorted_ids, probs, fixed, scalar_class)
        return work.candidate

    def boundary_gains(
        self,
        ids: np.ndarray,
        probs: np.ndarray,
        pair: tuple[int, int],
        feature: int,
    ) -> np.ndarray:
        """Gain at every boundary of one feature (invalid ones are -inf)."""
        ids = np.asarray(ids, dtype=np.int32)
        _, a, b = self._workload(ids, probs, pair, None)
        g_total = float(-a.sum())
        h_total = float(b.sum())
        self._abuf[ids] = a
        self._bbuf[ids] = b
        order = self._filter_sorted(ids)[feature]
        vals = self._cols[feature][order]
        ca = np.cumsum(self._abuf[order])[:-1]
        cb = np.cumsum(self._bbuf[order])[:-1]
        gl, hl = -ca, cb
        gr, hr = g_total - gl, h_total - hl
        parent = solve_pair(g_total, h_total, self.eps).gain
        gains = self._gain_terms(gl, hl) + self._gain_terms(gr, hr) - parent
        n = ids.size
        j = np.arange(n - 1)
        bad = (vals[1:] <= vals[:-1]) | (j + 1 < self.min_node_size)
        bad |= (n - j - 1) < self.min_node_size
        gains[bad] = -np.inf
        return gains

    def _filter_sorted(self, ids: np.ndarray) -> np.ndarray:
        if ids.size == self._features.shape[0]:
            return self._sorted
        self._membuf[ids] = True
        mask = self._membuf[self._sorted]
        out = self._sorted[mask].reshape(self._sorted.shape[0], ids.size)
        self._membuf[ids] = False
        return out

    # -- growth ----------------------------------------------------------

    def grow(
        self,
        probs: np.ndarray,
        ids: np.ndarray | None = None,
        fixed_pair: tuple[int, int] | None = None,
        scalar_class: int | None = None,
    ) -> tuple[Tree, list[tuple[int, np.ndarray]]]:
        """Grow one tree; returns it plus (leaf node, member ids) pairs.

        Splitting is best-first: the expandable leaf with the globally
        largest gain is split until the leaf budget is reached or no
        positive-gain candidate remains.
        """
        if ids is None:
            ids = np.arange(self._features.shape[0], dtype=np.int32)
        else:
            ids = np.asarray(ids, dtype=np.int32)
        if ids.size == 0:
            raise ValueError("cannot grow a tree with no active examples")

        feature: list[int] = []
        threshold: list[float] = []
        left: list[int] = []
        right: list[int] = []

        def new_node() -> int:
            feature.append(LEAF)
            threshold.append(0.0)
            left.append(LEAF)
            right.append(LEAF)
            return len(feature) - 1

        root = new_node()
        works: dict[int, _NodeWork] = {}
        heap: list[tuple[float, int, int]] = []
        seq = 0

        def push(work: _NodeWork) -> None:
            nonlocal seq
            works[work.node] = work
            if work.candidate is not None and work.candidate.gain > 0.0:
                heapq.heappush(heap, (-work.candidate.gain, seq, work.node))
                seq += 1

        push(self._make_work(root, ids, self._filter_sorted(ids), probs,
                             fixed_pair, scalar_class))
        leaves = 1
        while leaves < self.n_leaves and heap:
            _, _, node = heapq.heappop(heap)
            work = works[node]
            cand = work.candidate
            order = work.sorted_ids[cand.feature]
            left_ids = order[: cand.boundary + 1]
            right_ids = order[cand.boundary + 1 :]
            self._membuf[left_ids] = True
            if self.use_kernels:
                left_sorted, right_sorted = _kernels.partition(
                    work.sorted_ids, self._membuf, left_ids.size
                )
            else:
                mask = self._membuf[work.sorted_ids]
                left_sorted = work.sorted_ids[mask].reshape(-1, left_ids.size)
                right_sorted = work.sorted_ids[~mask].reshape(-1, right_ids.size)
            self._membuf[left_ids] = False

            feature[node] = cand.feature
            threshold[node] = cand.threshold
            lnode = new_node()
            rnode = new_node()
            left[node] = lnode
            right[node] = rnode
            push(self._make_work(lnode, left_ids, left_sorted, probs,
                                 fixed_pair, scalar_class))
            push(self._make_work(rnode, right_ids, right_sorted, probs,
                                 fixed_pair, scalar_class))
            leaves += 1

        n_nodes = len(feature)
        pair_first = np.zeros(n_nodes, dtype=np.int32)
        pair_second = np.full(n_nodes, NO_CLASS, dtype=np.int32)
        value = np.zeros(n_nodes)
        assignments = []
        for node in sorted(works):
            work = works[node]
            # internal nodes keep the pair their split gain was scored with
            pair_first[node] = work.pair[0]
            pair_second[node] = work.pair[1]
            if feature[node] == LEAF:
                value[node] = solve_pair(work.g, work.h, self.eps).step
                assignments.append((node, work.ids))

        tree = Tree(
            feature=np.asarray(feature, dtype=np.int32),
            threshold=np.asarray(threshold),
            left=np.asarray(left, dtype=np.int32),
            right=np.asarray(right, dtype=np.int32),
            pair_first=pair_first,
            pair_second=pair_second,
            value=value,
        )
        return tree, assignments
