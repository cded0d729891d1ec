"""Versioned text (JSON) save/load for trees, forests, and two-layer models.

Trees are stored as a pre-order node list; forests as a header plus tree
list. Out-of-bag masks are not stored: they are regenerated from the seed.
"""

import json

import numpy as np

from .errors import SerializationError
from .forest import ForestHyperparams, ForestModel, bootstrap_counts
from .multilayer import FeatureFlags, MultilayerModel, Standardizer
from .tree import Tree

FORMAT_VERSION = 1


def _tree_to_dict(tree):
    # Pre-order walk; children always follow their parent in the list.
    order = []
    remap = {}
    stack = [0]
    while stack:
        node = stack.pop()
        remap[node] = len(order)
        order.append(node)
        if tree.feature[node] >= 0:
            stack.append(int(tree.right[node]))
            stack.append(int(tree.left[node]))
    nodes = []
    for old in order:
        if tree.feature[old] >= 0:
            nodes.append({"f": int(tree.feature[old]),
                          "t": float(tree.threshold[old]),
                          "l": remap[int(tree.left[old])],
                          "r": remap[int(tree.right[old])]})
        else:
            nodes.append({"v": float(tree.value[old]),
                          "c": int(tree.count[old])})
    return {"nodes": nodes,
            "n_features": tree.n_features,
            "min_samples_leaf": tree.min_samples_leaf,
            "importance": [float(v) for v in tree.importance]}


def _tree_from_dict(d):
    nodes = d["nodes"]
    n = len(nodes)
    feature = np.full(n, -1, np.int64)
    threshold = np.zeros(n)
    left = np.full(n, -1, np.int64)
    right = np.full(n, -1, np.int64)
    value = np.zeros(n)
    count = np.zeros(n, np.int64)
    for i, node in enumerate(nodes):
        if "f" in node:
            feature[i] = node["f"]
            threshold[i] = node["t"]
            left[i] = node["l"]
            right[i] = node["r"]
        else:
            value[i] = node["v"]
            count[i] = node["c"]
    # Leaf values/counts are stored only on leaves; recompute internal node
    # values bottom-up so prediction arrays stay consistent.
    for i in range(n - 1, -1, -1):
        if feature[i] >= 0:
            cl, cr = count[left[i]], count[right[i]]
            count[i] = cl + cr
            value[i] = (value[left[i]] * cl + value[right[i]] * cr) / (cl + cr)
    return Tree(feature=feature, threshold=threshold, left=left, right=right,
                value=value, count=count, n_features=d["n_features"],
                min_samples_leaf=d["min_samples_leaf"],
                importance=np.asarray(d["importance"], dtype=np.float64))


def _forest_to_dict(model):
    return {"hyperparams": {"n_trees": model.hyperparams.n_trees,
                            "min_samples_leaf": model.hyperparams.min_samples_leaf,
                            "seed": model.hyperparams.seed},
            "n_features": model.n_features,
            "n_train_rows": int(model.oob_masks.shape[1]),
            "importances": [float(v) for v in model.importances],
            "trees": [_tree_to_dict(t) for t in model.trees]}


def _forest_from_dict(d):
    hp = ForestHyperparams(**d["hyperparams"])
    trees = tuple(_tree_from_dict(t) for t in d["trees"])
    n_rows = d["n_train_rows"]
    oob = np.empty((hp.n_trees, n_rows), dtype=bool)
    for i in range(hp.n_trees):
        oob[i] = bootstrap_counts(n_rows, hp.seed, i) == 0
    return ForestModel(trees=trees, hyperparams=hp,
                       n_features=d["n_features"],
                       importances=np.asarray(d["importances"], dtype=np.float64),
                       oob_masks=oob)


def save_forest(model, path):
    payload = {"format_version": FORMAT_VERSION, "kind": "forest",
               "model": _forest_to_dict(model)}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def save_multilayer(model, path):
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": "multilayer",
        "flags": {"use_x": model.flags.use_x, "use_y": model.flags.use_y,
                  "use_sigma_y": model.flags.use_sigma_y},
        "theta": model.theta,
        "oob_mode": model.oob_mode,
        "standardizer": None if model.standardizer is None else {
            "mean_y": model.standardizer.mean_y,
            "std_y": model.standardizer.std_y,
            "mean_sigma": model.standardizer.mean_sigma,
            "std_sigma": model.standardizer.std_sigma},
        "hyperparams": {"n_trees": model.hyperparams.n_trees,
                        "min_samples_leaf": model.hyperparams.min_samples_leaf,
                        "seed": model.hyperparams.seed},
        "layer1": None if model.layer1 is None else _forest_to_dict(model.layer1),
        "layer2": _forest_to_dict(model.layer2),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_model(path):
    """Load either a forest or a multilayer bundle; returns the model."""
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SerializationError(f"{path}: not a valid model file: {exc}") from None
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise SerializationError(f"{path}: unsupported format version {version!r}")
    kind = payload.get("kind")
    if kind == "forest":
        return _forest_from_dict(payload["model"])
    if kind == "multilayer":
        std = payload["standardizer"]
        return MultilayerModel(
            layer1=None if payload["layer1"] is None else _forest_from_dict(payload["layer1"]),
            layer2=_forest_from_dict(payload["layer2"]),
            flags=FeatureFlags(**payload["flags"]),
            standardizer=None if std is None else Standardizer(**std),
            theta=payload["theta"],
            hyperparams=ForestHyperparams(**payload["hyperparams"]),
            oob_mode=payload["oob_mode"])
    raise SerializationError(f"{path}: unknown model kind {kind!r}")
