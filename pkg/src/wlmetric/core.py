"""Labeled measure Markov chains (LMMCs) and their validation.

A finite LMMC is stored as three dense arrays: a row-stochastic transition
matrix, a fully supported stationary distribution and an ``(n, d)`` matrix of
real labels (state ``i`` carries label row ``i``; the label space is R^d with
the Euclidean metric).

All arrays held by the validated containers are read-only copies.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    NoConvergence,
    NonStochasticRow,
    NotStationary,
    ShapeMismatch,
    ValidationError,
    ZeroMass,
)

PROB_TOL = 1e-9
STATIONARY_TOL = 1e-8


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def as_prob_vec(weights, tol=PROB_TOL, name="weights"):
    """Return ``weights`` as a read-only float vector after checking it is a
    probability vector (nonnegative, sums to one within ``tol``)."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ShapeMismatch(f"{name} must be a non-empty 1-D array, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValidationError(f"{name} contains non-finite entries")
    if np.any(w < 0):
        raise ValidationError(f"{name} has negative entries")
    if abs(w.sum() - 1.0) > tol:
        raise ValidationError(f"{name} sums to {w.sum()!r}, not 1")
    return _frozen(w)


def as_markov_kernel(kernel, tol=PROB_TOL):
    """Validate a square row-stochastic matrix."""
    m = np.asarray(kernel, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ShapeMismatch(f"kernel must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonStochasticRow("kernel contains non-finite entries")
    bad = np.flatnonzero(np.any(m < 0, axis=1) | (np.abs(m.sum(axis=1) - 1.0) > tol))
    if bad.size:
        raise NonStochasticRow(f"kernel row {int(bad[0])} is not a probability vector")
    return _frozen(m)


def as_label_matrix(labels, n=None):
    """Coerce labels to an ``(n, d)`` float matrix; 1-D input becomes d=1."""
    lab = np.asarray(labels, dtype=float)
    if lab.ndim == 1:
        lab = lab[:, None]
    if lab.ndim != 2 or lab.shape[1] < 1:
        raise ShapeMismatch(f"labels must be (n, d) with d >= 1, got shape {lab.shape}")
    if n is not None and lab.shape[0] != n:
        raise ShapeMismatch(f"expected {n} label rows, got {lab.shape[0]}")
    if not np.all(np.isfinite(lab)):
        raise ValidationError("labels contain non-finite entries")
    return _frozen(lab)


def check_stationary(kernel, stationary, tol=STATIONARY_TOL):
    """Raise unless ``stationary`` is a fully supported fixed point of ``kernel``."""
    if stationary.shape[0] != kernel.shape[0]:
        raise ShapeMismatch(
            f"stationary has {stationary.shape[0]} entries, kernel has {kernel.shape[0]} states"
        )
    if np.any(stationary <= 0):
        raise ZeroMass(f"stationary distribution vanishes at state {int(np.argmin(stationary))}")
    residual = np.max(np.abs(stationary @ kernel - stationary))
    if residual > tol:
        raise NotStationary(f"||mu M - mu||_inf = {residual:.3e} exceeds {tol:.0e}")


@dataclass(frozen=True, eq=False)
class Lmmc:
    """A validated labeled measure Markov chain. Build with :func:`validate_lmmc`."""

    kernel: np.ndarray
    stationary: np.ndarray
    labels: np.ndarray

    @property
    def n(self):
        return self.kernel.shape[0]

    @property
    def label_dim(self):
        return self.labels.shape[1]

    def with_labels(self, labels):
        """Same chain, new labels (validated for shape and finiteness only)."""
        return Lmmc(self.kernel, self.stationary, as_label_matrix(labels, self.n))

    def permuted(self, perm):
        """Relabel states so that new state ``i`` is old state ``perm[i]``."""
        perm = np.asarray(perm)
        return Lmmc(
            _frozen(self.kernel[np.ix_(perm, perm)]),
            _frozen(self.stationary[perm]),
            _frozen(self.labels[perm]),
        )


def validate_lmmc(kernel, stationary, labels) -> Lmmc:
    """Build an :class:`Lmmc`, enforcing every invariant.

    Raises:
        ShapeMismatch: inconsistent state counts.
        NonStochasticRow: a kernel row is not a probability vector.
        ZeroMass: the stationary distribution is not fully supported.
        NotStationary: ``mu M != mu`` beyond 1e-8 in the sup norm.
    """
    k = as_markov_kernel(kernel)
    try:
        mu = as_prob_vec(stationary, name="stationary")
    except ValidationError as exc:
        if isinstance(exc, ShapeMismatch):
            raise
        if np.any(np.asarray(stationary, dtype=float) < 0):
            raise ZeroMass(str(exc)) from None
        raise NotStationary(str(exc)) from None
    lab = as_label_matrix(labels, k.shape[0])
    check_stationary(k, mu)
    return Lmmc(k, mu, lab)


def stationary_of(kernel, max_iter=10**6, tol=1e-10):
    """A stationary distribution of ``kernel``.

    Runs power iteration on the lazy chain ``(I + M) / 2`` (same fixed points,
    aperiodic) starting from the uniform vector, squaring the iteration
    matrix so that ``2**j`` steps cost ``j`` matrix products. For reducible
    chains the result is one of several stationary vectors and may not be
    fully supported; :func:`validate_lmmc` rejects those.

    Raises:
        NoConvergence: residual still above ``tol`` after ``max_iter`` steps.
    """
    m = as_markov_kernel(kernel)
    n = m.shape[0]
    lazy = 0.5 * (np.eye(n) + m)
    mu = np.full(n, 1.0 / n)
    steps = 1
    power = lazy
    while True:
        mu = mu @ power
        mu = np.clip(mu, 0.0, None)
        mu /= mu.sum()
        if np.max(np.abs(mu @ m - mu)) <= tol:
            return mu
        if steps >= max_iter:
            raise NoConvergence(f"no stationary vector within {max_iter} iterations")
        power = power @ power
        power /= power.sum(axis=1, keepdims=True)
        steps *= 2


def lmmc_from_kernel(kernel, labels) -> Lmmc:
    """Convenience: compute a stationary distribution, then validate."""
    return validate_lmmc(kernel, stationary_of(kernel), labels)
