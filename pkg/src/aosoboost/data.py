"""Dataset ingestion, per-feature presorting, and quantile binning.

Features are held column-major (Fortran order) because split scans walk
one feature across many examples.  Labels are normalized to a contiguous
0-based range in memory; the original values are kept so predictions and
model files can speak the caller's label vocabulary.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


class DataError(ValueError):
    """Malformed input data; message carries file/line context."""


def _normalize_labels(
    raw: np.ndarray, n_classes: int | None
) -> tuple[np.ndarray, int, list[int], bool]:
    values = sorted(set(int(v) for v in raw))
    if not values:
        raise DataError("empty dataset (no labels)")
    if n_classes is not None:
        # explicit vocabulary 1..n_classes; unobserved classes are allowed
        if values[0] < 1 or values[-1] > n_classes:
            raise DataError(
                "labels %r outside declared range 1..%d" % (values[:10], n_classes)
            )
        y = np.asarray(raw, dtype=np.int32) - 1
        return y, n_classes, list(range(1, n_classes + 1)), False
    contiguous = values[0] >= 1 and values == list(range(1, values[-1] + 1))
    if contiguous:
        k = values[-1]
        y = np.asarray(raw, dtype=np.int32) - 1
        return y, k, list(range(1, k + 1)), False
    mapping = {v: i for i, v in enumerate(values)}
    y = np.fromiter((mapping[int(v)] for v in raw), dtype=np.int32, count=len(raw))
    logger.warning(
        "labels are not contiguous from 1; remapped %d distinct values %s -> 1..%d",
        len(values),
        values if len(values) <= 10 else values[:10] + ["..."],
        len(values),
    )
    return y, len(values), values, True


@dataclass
class Dataset:
    """Column-major feature matrix plus normalized integer labels."""

    features: np.ndarray   # (N, D) float64, Fortran order
    labels: np.ndarray     # (N,) int32, in [0, n_classes)
    n_classes: int
    label_values: list[int]  # original label for each internal index
    label_remapped: bool = False

    @property
    def n_examples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def original_labels(self) -> np.ndarray:
        return np.asarray(self.label_values, dtype=np.int64)[self.labels]

    @classmethod
    def from_arrays(
        cls, features, labels, n_classes: int | None = None
    ) -> "Dataset":
        """Build from dense arrays; ``labels`` are original integer values."""
        x = np.asfortranarray(features, dtype=np.float64)
        if x.ndim != 2:
            raise DataError("features must be 2-dimensional")
        raw = np.asarray(labels)
        if raw.shape[0] != x.shape[0]:
            raise DataError(
                "feature rows (%d) and labels (%d) disagree"
                % (x.shape[0], raw.shape[0])
            )
        if raw.size == 0:
            raise DataError("empty dataset (N=0 rejected)")
        if not np.all(raw == np.floor(raw)):
            raise DataError("labels must be integers")
        y, k, values, remapped = _normalize_labels(raw.astype(np.int64), n_classes)
        return cls(x, y, k, values, remapped)


def load_libsvm(
    path: str, n_features: int | None = None, n_classes: int | None = None
) -> Dataset:
    """Parse whitespace-separated "label index:value" lines.

    Feature indices are 1-based and absent features are zero.  Duplicate
    indices on a line are an error; indices need not be increasing.
    """
    labels: list[int] = []
    rows: list[dict[int, float]] = []
    max_feature = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            tokens = line.split()
            try:
                lab = float(tokens[0])
            except ValueError:
                raise DataError(
                    "%s:%d: non-numeric label %r" % (path, lineno, tokens[0])
                ) from None
            if lab != int(lab):
                raise DataError(
                    "%s:%d: label %r is not an integer" % (path, lineno, tokens[0])
                )
            row: dict[int, float] = {}
            for tok in tokens[1:]:
                idx_str, _, val_str = tok.partition(":")
                if not val_str:
                    raise DataError(
                        "%s:%d: malformed pair %r" % (path, lineno, tok)
                    )
                try:
                    idx = int(idx_str)
                    val = float(val_str)
                except ValueError:
                    raise DataError(
                        "%s:%d: malformed pair %r" % (path, lineno, tok)
                    ) from None
                if idx < 1:
                    raise DataError(
                        "%s:%d: feature index %d is not positive" % (path, lineno, idx)
                    )
                if idx in row:
                    raise DataError(
                        "%s:%d: duplicate feature index %d" % (path, lineno, idx)
                    )
                row[idx] = val
                max_feature = max(max_feature, idx)
            labels.append(int(lab))
            rows.append(row)
    if not rows:
        raise DataError("%s: empty dataset (N=0 rejected)" % path)
    d = max_feature if n_features is None else n_features
    if max_feature > d:
        raise DataError(
            "%s: feature index %d exceeds expected arity %d" % (path, max_feature, d)
        )
    x = np.zeros((len(rows), d), order="F")
    for i, row in enumerate(rows):
        for idx, val in row.items():
            x[i, idx - 1] = val
    return Dataset.from_arrays(x, np.asarray(labels), n_classes)


def load_csv(
    path: str, label_column: int = 0, n_classes: int | None = None
) -> Dataset:
    """Load a rectangular numeric CSV; a non-numeric first row is a header.

    ``label_column`` may be negative to count from the end.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        raw_rows = [row for row in reader if row and any(c.strip() for c in row)]
    if not raw_rows:
        raise DataError("%s: empty dataset (N=0 rejected)" % path)

    def parse_row(row: list[str], lineno: int) -> list[float]:
        out = []
        for col, cell in enumerate(row):
            try:
                out.append(float(cell))
            except ValueError:
                raise DataError(
                    "%s:%d: non-numeric cell %r in column %d"
                    % (path, lineno, cell, col + 1)
                ) from None
        return out

    start = 0
    try:
        first = parse_row(raw_rows[0], 1)
    except DataError:
        start = 1  # header row
        if len(raw_rows) == 1:
            raise DataError("%s: only a header row, no data" % path) from None
        first = parse_row(raw_rows[1], 2)
    width = len(first)
    if width < 2:
        raise DataError("%s: need at least one feature and a label column" % path)
    data = np.empty((len(raw_rows) - start, width))
    data[0] = first
    for i, row in enumerate(raw_rows[start + 1 :], start=1):
        lineno = start + i + 1
        if len(row) != width:
            raise DataError(
                "%s:%d: ragged row (%d cells, expected %d)"
                % (path, lineno, len(row), width)
            )
        data[i] = parse_row(row, lineno)
    col = label_column if label_column >= 0 else width + label_column
    if not 0 <= col < width:
        raise DataError(
            "%s: label column %d out of range for %d columns" % (path, label_column, width)
        )
    labels = data[:, col]
    if not np.all(labels == np.floor(labels)):
        raise DataError("%s: label column %d contains non-integers" % (path, col))
    features = np.delete(data, col, axis=1)
    return Dataset.from_arrays(features, labels.astype(np.int64), n_classes)


def load_dataset(
    path: str,
    fmt: str = "auto",
    label_column: int = 0,
    n_features: int | None = None,
    n_classes: int | None = None,
) -> Dataset:
    """Dispatch on format; "auto" picks CSV for .csv files, libsvm otherwise."""
    if fmt == "auto":
        fmt = "csv" if str(path).lower().endswith(".csv") else "libsvm"
    if fmt == "csv":
        return load_csv(path, label_column=label_column, n_classes=n_classes)
    if fmt == "libsvm":
        return load_libsvm(path, n_features=n_features, n_classes=n_classes)
    raise DataError("unknown dataset format %r" % fmt)


@dataclass
class SortedIndex:
    """Per-feature example order, ascending by value, stable on ties."""

    order: np.ndarray  # (D, N) int32


def presort(dataset: Dataset) -> SortedIndex:
    x = dataset.features
    order = np.empty((x.shape[1], x.shape[0]), dtype=np.int32)
    for f in range(x.shape[1]):
        order[f] = np.argsort(x[:, f], kind="stable")
    return SortedIndex(order)


def quantize_features(dataset: Dataset, n_bins: int) -> Dataset:
    """Collapse each feature to at most ``n_bins`` representative values.

    Each value is replaced by the largest value in its quantile bin.  A
    left-value split threshold on the quantized data then separates the
    underlying raw bins exactly, so models trained on quantized features
    still route raw feature vectors consistently.
    """
    if not 2 <= n_bins <= 256:
        raise DataError("n_bins must be in [2, 256], got %d" % n_bins)
    x = dataset.features
    out = np.asfortranarray(x.copy())
    for f in range(x.shape[1]):
        col = x[:, f]
        uniq = np.unique(col)
        if uniq.size <= n_bins:
            continue
        edges = np.unique(np.quantile(col, np.linspace(0, 1, n_bins + 1)[1:-1]))
        bins = np.searchsorted(edges, col, side="right")
        reps = np.full(edges.size + 1, -np.inf)
        np.maximum.at(reps, bins, col)
        out[:, f] = reps[bins]
    return Dataset(
        features=out,
        labels=dataset.labels,
        n_classes=dataset.n_classes,
        label_values=dataset.label_values,
        label_remapped=dataset.label_remapped,
    )
