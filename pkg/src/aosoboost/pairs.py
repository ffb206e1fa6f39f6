"""Aggregate node statistics and the two-coordinate Newton subproblem.

A tree node restricts the constrained quadratic model to one class pair
(r, s) with opposite updates +t / -t.  The gradient and Hessian then
collapse to scalars that are cheap to maintain while a split scan moves
examples between the left and right side one at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Below this curvature a node is treated as pure: the Newton step is left
# at zero instead of producing huge or infinite values.
DEGENERATE_EPS = 1e-12


@dataclass
class PairSolution:
    """Closed-form minimizer of g*t + h*t^2/2 and the loss reduction."""

    g: float
    h: float
    step: float
    gain: float


def solve_pair(g: float, h: float, eps: float = DEGENERATE_EPS) -> PairSolution:
    """Newton step -g/h and gain g^2/(2h), guarded for vanishing curvature.

    Raises if h is negative, which can only come from corrupted statistics.
    """
    if h < 0:
        raise ValueError("negative pair Hessian %r signals a statistics bug" % h)
    if h <= eps:
        return PairSolution(g, h, 0.0, 0.0)
    return PairSolution(g, h, -g / h, g * g / (2.0 * h))


@dataclass
class NodeStats:
    """Sufficient statistics of one node's example set.

    residual_sum[k]  = sum over members of (indicator(y==k) - p_k)
    prob_sum[k]      = sum of p_k
    prob_sq_sum[k]   = sum of p_k^2
    cross_row        = sum of p_cross_class * p_k, kept only for the single
                       class the second-order pair rule needs; computed at
                       node initialization, updated in O(K) afterwards.

    add/remove touch every field in O(K) regardless of the member count.
    """

    n_classes: int
    count: int
    residual_sum: np.ndarray
    prob_sum: np.ndarray
    prob_sq_sum: np.ndarray
    cross_class: int = -1
    cross_row: np.ndarray | None = None

    @classmethod
    def empty(cls, n_classes: int) -> "NodeStats":
        return cls(
            n_classes=n_classes,
            count=0,
            residual_sum=np.zeros(n_classes),
            prob_sum=np.zeros(n_classes),
            prob_sq_sum=np.zeros(n_classes),
        )

    @classmethod
    def from_examples(
        cls,
        labels: np.ndarray,
        probs: np.ndarray,
        cross_class: int | None = None,
    ) -> "NodeStats":
        """Batch construction in O(nK).

        The cross-product row is computed for ``cross_class`` when given,
        otherwise for the class maximizing residual_sum, which is exactly
        the row the second-order pair rule will ask for.
        """
        labels = np.asarray(labels)
        probs = np.asarray(probs, dtype=np.float64)
        k = probs.shape[1]
        stats = cls(
            n_classes=k,
            count=int(labels.size),
            residual_sum=np.bincount(labels, minlength=k).astype(np.float64)
            - probs.sum(axis=0),
            prob_sum=probs.sum(axis=0),
            prob_sq_sum=(probs * probs).sum(axis=0),
        )
        if labels.size:
            r = int(np.argmax(stats.residual_sum)) if cross_class is None else cross_class
            stats.cross_class = r
            stats.cross_row = probs.T @ probs[:, r]
        return stats

    def copy(self) -> "NodeStats":
        return NodeStats(
            n_classes=self.n_classes,
            count=self.count,
            residual_sum=self.residual_sum.copy(),
            prob_sum=self.prob_sum.copy(),
            prob_sq_sum=self.prob_sq_sum.copy(),
            cross_class=self.cross_class,
            cross_row=None if self.cross_row is None else self.cross_row.copy(),
        )

    def add(self, label: int, probs: np.ndarray) -> None:
        p = np.asarray(probs, dtype=np.float64)
        self.residual_sum -= p
        self.residual_sum[label] += 1.0
        self.prob_sum += p
        self.prob_sq_sum += p * p
        if self.cross_row is not None:
            self.cross_row += p[self.cross_class] * p
        self.count += 1

    def remove(self, label: int, probs: np.ndarray) -> None:
        if self.count == 0:
            raise ValueError("cannot remove an example from empty statistics")
        p = np.asarray(probs, dtype=np.float64)
        self.residual_sum += p
        self.residual_sum[label] -= 1.0
        self.prob_sum -= p
        self.prob_sq_sum -= p * p
        if self.cross_row is not None:
            self.cross_row -= p[self.cross_class] * p
        self.count -= 1

    def pair_cross(self, r: int, s: int) -> float:
        """Sum of p_r * p_s over members; needs the cached cross row."""
        if self.cross_row is None or self.cross_class not in (r, s):
            raise ValueError(
                "cross row for class %d or %d not available; "
                "rebuild the statistics with from_examples" % (r, s)
            )
        other = s if self.cross_class == r else r
        return float(self.cross_row[other])


def pair_gradient(stats: NodeStats, r: int, s: int) -> float:
    """Scalar gradient of the pair subproblem at t = 0."""
    return float(-(stats.residual_sum[r] - stats.residual_sum[s]))


def pair_hessian(stats: NodeStats, r: int, s: int) -> float:
    """Scalar curvature: sum of p_r(1-p_r) + p_s(1-p_s) + 2 p_r p_s."""
    h = (
        stats.prob_sum[r]
        - stats.prob_sq_sum[r]
        + stats.prob_sum[s]
        - stats.prob_sq_sum[s]
        + 2.0 * stats.pair_cross(r, s)
    )
    return float(h)


def select_pair_first_order(stats: NodeStats) -> tuple[int, int]:
    """Steepest-descent pair: largest vs smallest residual sum.

    Ties resolve to the lowest class index so models are reproducible.
    """
    rs = stats.residual_sum
    r = int(np.argmax(rs))
    masked = np.where(np.arange(stats.n_classes) == r, np.inf, rs)
    s = int(np.argmin(masked))
    return r, s


def select_pair_second_order(
    stats: NodeStats, eps: float = DEGENERATE_EPS
) -> tuple[int, int]:
    """Curvature-aware pair: r as in the first-order rule, then the partner
    maximizing squared gradient difference over the pair Hessian.

    Degenerate denominators score minus infinity; ties resolve to the
    lowest class index.
    """
    rs = stats.residual_sum
    r = int(np.argmax(rs))
    if stats.cross_row is None or stats.cross_class != r:
        raise ValueError(
            "second-order selection needs the cross row for class %d; "
            "build the statistics with from_examples" % r
        )
    diag = stats.prob_sum - stats.prob_sq_sum
    denom = diag[r] + diag + 2.0 * stats.cross_row
    num = (rs[r] - rs) ** 2
    scores = np.full(stats.n_classes, -np.inf)
    ok = denom > eps
    ok[r] = False
    scores[ok] = num[ok] / denom[ok]
    s = int(np.argmax(scores))
    if s == r:  # every candidate degenerate; fall back to lowest index != r
        s = 0 if r != 0 else 1
    return r, s
