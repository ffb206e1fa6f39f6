"""Multi-class logistic link, log loss, and per-example derivatives.

Class indices are 0-based throughout the in-memory API; the original label
values only reappear at the data-loading and prediction boundaries.
"""

from __future__ import annotations

import numpy as np

# Probability floor used inside the log when reporting loss.  It is never
# applied to gradients or Hessians, so the optimization statistics stay
# unbiased while the reported loss remains finite for saturated examples.
PROB_FLOOR = 1e-15


def class_probabilities(scores: np.ndarray) -> np.ndarray:
    """Map additive scores to class probabilities along the last axis.

    The maximum score is subtracted before exponentiation; the link is
    invariant to shifting all scores by a constant, so the result is
    unchanged while large scores can no longer overflow.
    """
    f = np.asarray(scores, dtype=np.float64)
    if f.shape[-1] < 2:
        raise ValueError("need at least 2 classes, got shape %r" % (f.shape,))
    if not np.all(np.isfinite(f)):
        raise ValueError("scores contain a non-finite component")
    z = f - f.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def sample_loss(label: int, scores: np.ndarray) -> float:
    """Negative log probability of the true class (0-based ``label``)."""
    p = class_probabilities(scores)
    if not 0 <= label < p.shape[-1]:
        raise ValueError("label %d out of range for %d classes" % (label, p.shape[-1]))
    return float(-np.log(max(p[label], PROB_FLOOR)))


def total_loss(labels: np.ndarray, scores: np.ndarray) -> float:
    """Sum of per-example losses for an (N, K) score matrix.

    numpy's pairwise summation keeps the accumulated rounding error far
    below the 1e-16 convergence threshold the training loop compares
    against, even for N in the 1e5 range.
    """
    labels = np.asarray(labels)
    if labels.size == 0:
        return 0.0
    p = class_probabilities(scores)
    py = p[np.arange(labels.size), labels]
    return float(np.sum(-np.log(np.maximum(py, PROB_FLOOR))))


def total_loss_from_probabilities(labels: np.ndarray, probs: np.ndarray) -> float:
    """Same as :func:`total_loss` when the link has already been applied."""
    labels = np.asarray(labels)
    if labels.size == 0:
        return 0.0
    py = probs[np.arange(labels.size), labels]
    return float(np.sum(-np.log(np.maximum(py, PROB_FLOOR))))


def per_class_loss(labels: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Loss mass attributed to each true class; used by the worst-class rule."""
    labels = np.asarray(labels)
    k = probs.shape[-1]
    if labels.size == 0:
        return np.zeros(k)
    py = probs[np.arange(labels.size), labels]
    losses = -np.log(np.maximum(py, PROB_FLOOR))
    return np.bincount(labels, weights=losses, minlength=k)


def sample_gradient(label: int, probs: np.ndarray) -> np.ndarray:
    """Residual vector (indicator minus probability); sums to zero."""
    p = np.asarray(probs, dtype=np.float64)
    g = -p.copy()
    g[label] += 1.0
    return g


def sample_hessian(probs: np.ndarray) -> np.ndarray:
    """Curvature matrix diag(p) - p p^T; symmetric PSD with null vector 1."""
    p = np.asarray(probs, dtype=np.float64)
    return np.diag(p) - np.outer(p, p)
