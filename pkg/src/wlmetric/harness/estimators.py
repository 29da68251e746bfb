"""scikit-learn style wrappers around the pairwise distances.

``fit`` memorizes reference graphs; ``transform`` returns distances (or
kernel values) from new graphs to them, so the output can feed any estimator
that accepts precomputed distances or kernels.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..graphs import DEFAULT_Q
from .pipeline import cross_distances, kernel_export, prepare


class WLDistance(TransformerMixin, BaseEstimator):
    """Distances from graphs to the graphs seen in ``fit``.

    Args:
        method: ``"wl"``, ``"wllb"`` or ``"wwl"``.
        k: depth.
        q: laziness of the graph random walks.
        label_scheme: ``raw``, ``degree``, ``f2`` or ``g``.
        n_jobs: joblib worker count.
    """

    def __init__(self, method="wl", k=1, q=DEFAULT_Q, label_scheme="raw", n_jobs=1):
        self.method = method
        self.k = k
        self.q = q
        self.label_scheme = label_scheme
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        self.reference_ = prepare(list(X), self.method, self.q, self.label_scheme)
        self.n_reference_ = len(self.reference_)
        return self

    def transform(self, X):
        check_is_fitted(self, "reference_")
        items = prepare(list(X), self.method, self.q, self.label_scheme)
        return cross_distances(items, self.reference_, self.method, self.k, self.n_jobs)


class WLKernel(WLDistance):
    """``exp(-gamma * d)`` against the reference graphs."""

    def __init__(self, method="wllb", k=1, q=DEFAULT_Q, label_scheme="raw", gamma=1.0, n_jobs=1):
        super().__init__(method=method, k=k, q=q, label_scheme=label_scheme, n_jobs=n_jobs)
        self.gamma = gamma

    def transform(self, X):
        return kernel_export(np.asarray(super().transform(X)), self.gamma)
