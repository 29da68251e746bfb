"""Pairwise distance matrices, 1-NN cross-validation and kernel export."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from sklearn.model_selection import StratifiedKFold

from ..exceptions import DegenerateFold, PairFailure, ValidationError, WLMetricError
from ..graphs import DEFAULT_Q, graph_to_lmmc, relabel, wwl_hat_distance
from ..wl import wl_distance, wllb_distance
from .io import Dataset, DistanceMatrix

METHODS = ("wl", "wllb", "wwl")
# CLI spellings of the relabeling schemes.
LABEL_ALIASES = {"raw": "raw", "degree": "degree", "f2": "scalar_f2", "g": "vector_g"}


def _scheme(label_scheme):
    scheme = LABEL_ALIASES.get(label_scheme, label_scheme)
    if scheme not in LABEL_ALIASES.values():
        raise ValidationError(f"unknown label scheme {label_scheme!r}")
    return scheme


def prepare(graphs, method, q, label_scheme):
    """Relabel graphs and, for the chain-based methods, build their chains."""
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}; expected one of {METHODS}")
    scheme = _scheme(label_scheme)
    relabeled = [relabel(g, scheme) for g in graphs]
    if method == "wwl":
        return relabeled
    return [graph_to_lmmc(g, q) for g in relabeled]


def pair_distance(a, b, method, k):
    """Distance between two prepared items (see :func:`prepare`)."""
    if method == "wl":
        return wl_distance(a, b, k)
    if method == "wllb":
        return wllb_distance(a, b, k)
    return wwl_hat_distance(a, b, k)


def _guarded(a, b, method, k, i, j):
    try:
        return pair_distance(a, b, method, k)
    except WLMetricError as exc:
        raise PairFailure(i, j, exc) from exc


def cross_distances(items_a, items_b, method, k, n_jobs=1, symmetric=False):
    """Distances between two lists of prepared items.

    With ``symmetric=True`` the lists are the same and only the upper
    triangle is computed; the diagonal is zero.

    Raises:
        PairFailure: a pair failed; carries the pair indices and the cause.
    """
    na, nb = len(items_a), len(items_b)
    if symmetric:
        pairs = [(i, j) for i in range(na) for j in range(i + 1, na)]
    else:
        pairs = [(i, j) for i in range(na) for j in range(nb)]
    values = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_guarded)(items_a[i], items_b[j], method, k, i, j) for i, j in pairs
    )
    out = np.zeros((na, nb))
    for (i, j), v in zip(pairs, values):
        out[i, j] = v
        if symmetric:
            out[j, i] = v
    return out


def distance_matrix(dataset, method="wl", k=1, q=DEFAULT_Q, label_scheme="raw", n_jobs=1) -> DistanceMatrix:
    """All pairwise distances within a dataset (or list of graphs).

    Args:
        dataset: a :class:`Dataset` or a list of graphs.
        method: ``"wl"``, ``"wllb"`` or ``"wwl"``.
        k: depth.
        q: laziness of the graph random walks (ignored by ``"wwl"``).
        label_scheme: ``raw``, ``degree``, ``f2`` or ``g``.
        n_jobs: joblib worker count; values do not depend on it.
    """
    graphs = dataset.graphs if isinstance(dataset, Dataset) else list(dataset)
    items = prepare(graphs, method, q, label_scheme)
    entries = cross_distances(items, items, method, k, n_jobs, symmetric=True)
    params = {"k": int(k), "q": float(q), "labels": label_scheme}
    return DistanceMatrix(entries, f"{method}_{int(k)}", params)


@dataclass(frozen=True)
class KnnResult:
    mean: float
    std: float
    fold_accuracies: tuple


def knn_classify(dm, class_labels, folds=10, seed=0) -> KnnResult:
    """Stratified k-fold cross-validated 1-nearest-neighbor accuracy.

    Each test graph takes the class of its nearest training graph; ties go
    to the lowest index.

    Raises:
        DegenerateFold: some class is missing from a training split.
    """
    d = np.asarray(dm.entries if isinstance(dm, DistanceMatrix) else dm, dtype=float)
    y = np.asarray(class_labels)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] != y.size:
        raise ValidationError(f"matrix shape {d.shape} does not match {y.size} class labels")
    if isinstance(folds, bool) or int(folds) != folds or folds < 2:
        raise ValidationError(f"folds must be an integer >= 2, got {folds!r}")
    classes = np.unique(y)
    splitter = StratifiedKFold(n_splits=int(folds), shuffle=True, random_state=seed)
    accs = []
    try:
        splits = list(splitter.split(np.zeros(y.size), y))
    except ValueError as exc:
        raise DegenerateFold(str(exc)) from None
    for train, test in splits:
        if np.unique(y[train]).size != classes.size:
            raise DegenerateFold("a class is absent from a training split")
        nearest = train[np.argmin(d[np.ix_(test, train)], axis=1)]
        accs.append(float(np.mean(y[nearest] == y[test])))
    return KnnResult(float(np.mean(accs)), float(np.std(accs)), tuple(accs))


def kernel_export(dm, gamma) -> np.ndarray:
    """``exp(-gamma * d)`` entrywise; no positive-semidefinite repair."""
    if not np.isfinite(gamma) or gamma <= 0:
        raise ValidationError(f"gamma must be positive, got {gamma!r}")
    d = np.asarray(dm.entries if isinstance(dm, DistanceMatrix) else dm, dtype=float)
    return np.exp(-gamma * d)
