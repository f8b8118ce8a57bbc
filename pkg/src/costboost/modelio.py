"""Versioned JSON container for trained models.

Every file carries ``format``, ``version`` and ``kind`` (``bagged``,
``boosted`` or ``svm``) plus the feature names.  Floats are written with
``repr`` so a load/save round trip is exact and files are byte-stable.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from costboost._io import atomic_write_text
from costboost.bagging import BaggedEnsemble
from costboost.boosting import BoostedEnsemble, CostMatrix
from costboost.errors import VersionMismatch
from costboost.svm import SvmModel
from costboost.tree import Tree, TreeParams

FORMAT = "costboost-model"
VERSION = 1


def _floats(a):
    return [float(v) for v in np.asarray(a).ravel()]


def _cost(cost):
    return None if cost is None else cost.to_list()


def model_to_dict(model) -> dict:
    head = {"format": FORMAT, "version": VERSION}
    if isinstance(model, BaggedEnsemble):
        return head | {
            "kind": "bagged",
            "feature_names": list(model.feature_names),
            "seed": model.seed,
            "params": model.params.to_dict(),
            "cost": _cost(model.cost),
            "trees": [t.to_dict() for t in model.trees],
            "in_bag": ["".join("1" if b else "0" for b in row) for row in model.in_bag],
        }
    if isinstance(model, BoostedEnsemble):
        return head | {
            "kind": "boosted",
            "algorithm": model.algorithm,
            "feature_names": list(model.feature_names),
            "cost": _cost(model.cost),
            "params": model.params,
            "alphas": _floats(model.alphas),
            "eps_history": _floats(model.eps_history),
            "validation_losses": _floats(model.validation_losses),
            "learners": [t.to_dict() for t in model.weak_learners],
        }
    if isinstance(model, SvmModel):
        return head | {
            "kind": "svm",
            "feature_names": list(model.feature_names),
            "weight_vector": _floats(model.weight_vector),
            "bias": float(model.bias),
            "c_pos": float(model.c_pos),
            "c_neg": float(model.c_neg),
            "training_kkt_residual": float(model.training_kkt_residual),
            "mean": _floats(model.mean),
            "scale": _floats(model.scale),
            "dual": _floats(model.dual),
            "converged": bool(model.converged),
            "n_iter": int(model.n_iter),
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(d: dict):
    if d.get("format") != FORMAT:
        raise VersionMismatch("not a costboost model file")
    if d.get("version") != VERSION:
        raise VersionMismatch(f"unsupported model version {d.get('version')!r}; expected {VERSION}")
    names = tuple(d["feature_names"])
    cost = None if d.get("cost") is None else CostMatrix(d["cost"])
    kind = d["kind"]
    if kind == "bagged":
        mask = np.array([[c == "1" for c in row] for row in d["in_bag"]], dtype=bool)
        trees = [Tree.from_dict(t) for t in d["trees"]]
        return BaggedEnsemble(trees, mask.reshape(len(trees), -1), names, d["seed"], TreeParams(**d["params"]), cost)
    if kind == "boosted":
        return BoostedEnsemble(
            [Tree.from_dict(t) for t in d["learners"]],
            d["alphas"],
            d["algorithm"],
            cost,
            names,
            tuple(d["eps_history"]),
            tuple(d["validation_losses"]),
            d["params"],
        )
    if kind == "svm":
        return SvmModel(
            np.array(d["weight_vector"]),
            d["bias"],
            d["c_pos"],
            d["c_neg"],
            d["training_kkt_residual"],
            np.array(d["mean"]),
            np.array(d["scale"]),
            np.array(d["dual"]),
            d["converged"],
            d["n_iter"],
            names,
        )
    raise VersionMismatch(f"unknown model kind {kind!r}")


def dumps_model(model) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":")) + "\n"


def save_model(model, path) -> Path:
    return atomic_write_text(path, dumps_model(model))


def load_model(path):
    with Path(path).open(encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise VersionMismatch(f"{path}: not a JSON model file ({exc})") from None
    return model_from_dict(d)
