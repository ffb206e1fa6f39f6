"""Versioned JSON serialization for trained models.

The document layout is deterministic (fixed key order, repr-roundtrip
floats), so saving a loaded model reproduces the file byte for byte.
Class indices are stored 1-based; single-class leaves store null for the
second class.
"""

from __future__ import annotations

import json

import numpy as np

from .boosting import Model, TreeGroup
from .tree import LEAF, NO_CLASS, Tree

FORMAT_VERSION = 1


class ModelLoadError(ValueError):
    """Unreadable or schema-violating model file."""


def _tree_to_doc(tree: Tree) -> dict:
    nodes = []
    for i in range(tree.n_nodes):
        leaf = tree.feature[i] == LEAF
        s = int(tree.pair_second[i])
        nodes.append(
            {
                "kind": "leaf" if leaf else "internal",
                "feature": None if leaf else int(tree.feature[i]),
                "threshold": None if leaf else float(tree.threshold[i]),
                "left": None if leaf else int(tree.left[i]),
                "right": None if leaf else int(tree.right[i]),
                "pair_r": int(tree.pair_first[i]) + 1,
                "pair_s": None if s == NO_CLASS else s + 1,
                "value": float(tree.value[i]) if leaf else None,
            }
        )
    return {"nodes": nodes}


def _tree_from_doc(doc: dict) -> Tree:
    try:
        nodes = doc["nodes"]
        n = len(nodes)
        feature = np.full(n, LEAF, dtype=np.int32)
        threshold = np.zeros(n)
        left = np.full(n, LEAF, dtype=np.int32)
        right = np.full(n, LEAF, dtype=np.int32)
        pair_first = np.zeros(n, dtype=np.int32)
        pair_second = np.full(n, NO_CLASS, dtype=np.int32)
        value = np.zeros(n)
        for i, node in enumerate(nodes):
            pair_first[i] = int(node["pair_r"]) - 1
            if node["pair_s"] is not None:
                pair_second[i] = int(node["pair_s"]) - 1
            if node["kind"] == "internal":
                feature[i] = int(node["feature"])
                threshold[i] = float(node["threshold"])
                left[i] = int(node["left"])
                right[i] = int(node["right"])
            elif node["kind"] == "leaf":
                value[i] = float(node["value"])
            else:
                raise ModelLoadError("unknown node kind %r" % node["kind"])
    except (KeyError, TypeError) as exc:
        raise ModelLoadError("malformed tree document: %s" % exc) from None
    if n == 0:
        raise ModelLoadError("tree with no nodes")
    return Tree(feature, threshold, left, right, pair_first, pair_second, value)


def model_to_doc(model: Model) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "algorithm": model.algorithm,
        "n_classes": model.n_classes,
        "n_features": model.n_features,
        "shrinkage": model.shrinkage,
        "label_values": list(model.label_values),
        "config": model.config,
        "metadata": model.metadata,
        "groups": [
            {
                "base_class": None if g.base_class is None else g.base_class + 1,
                "trees": [_tree_to_doc(t) for t in g.trees],
            }
            for g in model.groups
        ],
    }


def model_from_doc(doc: dict) -> Model:
    if not isinstance(doc, dict):
        raise ModelLoadError("model document is not an object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelLoadError(
            "unsupported format_version %r (expected %d)" % (version, FORMAT_VERSION)
        )
    required = (
        "algorithm",
        "n_classes",
        "n_features",
        "shrinkage",
        "label_values",
        "groups",
    )
    missing = [key for key in required if key not in doc]
    if missing:
        raise ModelLoadError("model document missing keys %r" % missing)
    groups = []
    for g in doc["groups"]:
        base = g.get("base_class")
        groups.append(
            TreeGroup(
                trees=[_tree_from_doc(t) for t in g["trees"]],
                base_class=None if base is None else int(base) - 1,
            )
        )
    return Model(
        algorithm=doc["algorithm"],
        n_classes=int(doc["n_classes"]),
        n_features=int(doc["n_features"]),
        shrinkage=float(doc["shrinkage"]),
        groups=groups,
        label_values=[int(v) for v in doc["label_values"]],
        config=doc.get("config", {}),
        metadata=doc.get("metadata", {}),
    )


def save_model(model: Model, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_doc(model), fh, separators=(",", ":"))
        fh.write("\n")


def load_model(path: str) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelLoadError("%s: invalid model file: %s" % (path, exc)) from None
    return model_from_doc(doc)
