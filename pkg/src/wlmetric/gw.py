"""Markov chain metric spaces: lower bounds and the k-step distortion.

The k-step Gromov-Wasserstein distance itself is an infimum over couplings
with no known polynomial algorithm, so this module only evaluates quantities
that bound it: eccentricity-labeled WL distances, a transport lower bound
built from per-point WL distances, the diameter gap, and the distortion of
any explicit feasible pair of couplings (an upper bound).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .core import Lmmc, _frozen, as_markov_kernel, as_prob_vec, check_stationary
from .exceptions import MarginalMismatch, NotAMetric, ShapeMismatch, TooLarge, ValidationError
from .transport import COUPLING_TOL, ot_solve, ot_value
from .wl import kstep_kernel, wl_distance

METRIC_TOL = 1e-9
MAX_CHAIN_STATES = 32
EXHAUSTIVE_TRIANGLE = 64


@dataclass(frozen=True, eq=False)
class Mcms:
    """Markov chain on a finite metric space. Build with :func:`validate_mcms`."""

    kernel: np.ndarray
    stationary: np.ndarray
    metric: np.ndarray

    @property
    def n(self):
        return self.kernel.shape[0]

    def as_lmmc(self, labels):
        """Forget the metric, attach ``labels``."""
        lab = np.asarray(labels, dtype=float)
        if lab.ndim == 1:
            lab = lab[:, None]
        return Lmmc(self.kernel, self.stationary, _frozen(lab))


def check_metric(d, tol=METRIC_TOL, rng=None, samples=200_000):
    """Raise :class:`NotAMetric` unless ``d`` is a proper finite metric.

    The triangle inequality is checked on all triples when ``n <= 64`` and on
    ``samples`` random triples otherwise.
    """
    n = d.shape[0]
    if d.shape != (n, n):
        raise ShapeMismatch(f"metric must be square, got {d.shape}")
    if not np.all(np.isfinite(d)) or np.any(d < 0):
        raise NotAMetric("metric entries must be finite and nonnegative")
    if np.max(np.abs(d - d.T), initial=0.0) > tol:
        raise NotAMetric("metric is not symmetric")
    if np.max(np.abs(np.diag(d)), initial=0.0) > tol:
        raise NotAMetric("metric has a nonzero diagonal")
    off = ~np.eye(n, dtype=bool)
    if np.any(d[off] <= 0):
        raise NotAMetric("distinct points at distance zero")
    if n <= EXHAUSTIVE_TRIANGLE:
        # d[i, k] <= d[i, j] + d[j, k] for all i, j, k
        gap = d[:, None, :] - d[:, :, None] - d[None, :, :]
        worst = gap.max()
    else:
        rng = np.random.default_rng(0) if rng is None else rng
        i, j, k = rng.integers(0, n, size=(3, samples))
        worst = np.max(d[i, k] - d[i, j] - d[j, k])
    if worst > tol * max(1.0, d.max()):
        raise NotAMetric(f"triangle inequality violated by {worst:.3e}")


def validate_mcms(kernel, stationary, metric) -> Mcms:
    """Build an :class:`Mcms` after checking every invariant."""
    k = as_markov_kernel(kernel)
    mu = as_prob_vec(stationary, name="stationary")
    check_stationary(k, mu)
    d = np.asarray(metric, dtype=float)
    if d.shape != k.shape:
        raise ShapeMismatch(f"metric shape {d.shape} does not match kernel shape {k.shape}")
    check_metric(d)
    return Mcms(k, mu, _frozen(0.5 * (d + d.T)))


def mms_chain(metric, weights) -> Mcms:
    """Metric measure space as a chain whose every row is ``weights``."""
    mu = as_prob_vec(weights, name="weights")
    return validate_mcms(np.tile(mu, (mu.size, 1)), mu, metric)


def eccentricity(m: Mcms) -> np.ndarray:
    """Mean distance from each point, under the stationary measure; ``(n, 1)``."""
    return (m.metric @ m.stationary)[:, None]


def diameter(m: Mcms) -> float:
    """Mean pairwise distance ``sum_ij d[i, j] mu[i] mu[j]``."""
    return float(m.stationary @ m.metric @ m.stationary)


def diameter_lb(mx: Mcms, my: Mcms) -> float:
    """``|diameter(mx) - diameter(my)|``, a lower bound independent of k."""
    return abs(diameter(mx) - diameter(my))


def _point_lmmc(m, i):
    return Lmmc(m.kernel, m.stationary, _frozen(m.metric[i][:, None]))


def tlb_matrix(mx: Mcms, my: Mcms, k, n_jobs=1) -> np.ndarray:
    """``T[i, j]``: depth-``k`` WL distance when each space is labeled by the
    distance to its point ``i`` (resp. ``j``)."""
    xs = [_point_lmmc(mx, i) for i in range(mx.n)]
    ys = [_point_lmmc(my, j) for j in range(my.n)]
    pairs = [(i, j) for i in range(mx.n) for j in range(my.n)]
    values = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(wl_distance)(xs[i], ys[j], k) for i, j in pairs
    )
    return np.asarray(values, dtype=float).reshape(mx.n, my.n)


def tlb_lower_bound(mx: Mcms, my: Mcms, k=1, k1_fast=False, n_jobs=1) -> float:
    """Transport lower bound on the k-step GW distance.

    Solves OT between the stationary measures with cost :func:`tlb_matrix`.
    For chains with constant kernels this is the classical third lower bound
    for metric measure spaces.

    Args:
        mx: first space.
        my: second space.
        k: depth, at least 1.
        k1_fast: use depth 1 regardless of ``k`` (cheaper, weakest bound).
        n_jobs: joblib worker count for the ``n * m`` entries.
    """
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ValidationError(f"k must be an integer >= 1, got {k!r}")
    depth = 1 if k1_fast else int(k)
    return ot_value(tlb_matrix(mx, my, depth, n_jobs), mx.stationary, my.stationary)


# k-step couplings ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KStepCouplingChain:
    """A sequence of 1-step coupling fields.

    ``steps[t][x, y]`` is an ``(n, m)`` coupling of kernel rows ``x`` and
    ``y``; each step is stored as an ``(n, m, n, m)`` array. The composed
    k-step coupling applies ``steps[0]`` first.
    """

    steps: tuple

    @property
    def k(self):
        return len(self.steps)

    def composed(self) -> np.ndarray:
        """``nu[x, y]``: the k-step coupling at ``(x, y)``, shape ``(n, m, n, m)``."""
        n, m = self.steps[0].shape[:2]
        total = np.eye(n * m)
        for step in self.steps:
            total = total @ step.reshape(n * m, n * m)
        return total.reshape(n, m, n, m)

    def check(self, kx, ky, tol=COUPLING_TOL):
        """Verify each step couples kernel rows and the composition couples
        k-step kernel rows.

        Raises:
            MarginalMismatch: a marginal is off by more than ``tol`` (``1e-6``
                for the composition).
        """
        for t, step in enumerate(self.steps):
            _check_field(step, kx, ky, tol, f"step {t}")
        _check_field(
            self.composed(), kstep_kernel(kx, self.k).rows, kstep_kernel(ky, self.k).rows, 1e-6, "composition"
        )
        return self


def _check_field(field, kx, ky, tol, what):
    if np.any(field < -tol):
        raise MarginalMismatch(f"{what}: negative mass")
    rows = field.sum(axis=3)
    cols = field.sum(axis=2)
    if np.max(np.abs(rows - kx[:, None, :])) > tol or np.max(np.abs(cols - ky[None, :, :])) > tol:
        raise MarginalMismatch(f"{what}: marginals differ from the kernel rows")


def _check_size(mx, my):
    if mx.n > MAX_CHAIN_STATES or my.n > MAX_CHAIN_STATES:
        raise TooLarge(f"k-step coupling chains are limited to {MAX_CHAIN_STATES} states per side")


def product_layer(mx: Mcms, my: Mcms) -> np.ndarray:
    """1-step field of independent couplings ``m_x (x) m_y``."""
    _check_size(mx, my)
    return np.einsum("ai,bj->abij", mx.kernel, my.kernel)


def diagonal_layer(m: Mcms) -> np.ndarray:
    """1-step field of a chain with itself: the diagonal coupling of ``m_x``
    with itself at ``(x, x)``, independent couplings elsewhere."""
    _check_size(m, m)
    out = np.einsum("ai,bj->abij", m.kernel, m.kernel)
    for x in range(m.n):
        out[x, x] = np.diag(m.kernel[x])
    return out


def optimal_layer(mx, my, cost) -> np.ndarray:
    """1-step field of optimal couplings for ``cost`` between every row pair."""
    _check_size(mx, my)
    n, m = mx.n, my.n
    out = np.zeros((n, m, n, m))
    for x in range(n):
        for y in range(m):
            out[x, y] = ot_solve(cost, mx.kernel[x], my.kernel[y]).coupling.plan
    return out


def random_coupling(a, b, rng, blend=None) -> np.ndarray:
    """A random feasible coupling of ``a`` and ``b``.

    Mixes the independent coupling with an optimal plan for a random cost,
    which yields couplings spread over the transportation polytope.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    vertex = ot_solve(rng.random((a.size, b.size)), a, b).coupling.plan
    t = rng.random() if blend is None else blend
    return t * np.outer(a, b) + (1.0 - t) * vertex


def random_layer(mx: Mcms, my: Mcms, rng) -> np.ndarray:
    """1-step field with an independent random coupling at every pair."""
    _check_size(mx, my)
    out = np.zeros((mx.n, my.n, mx.n, my.n))
    for x in range(mx.n):
        for y in range(my.n):
            out[x, y] = random_coupling(mx.kernel[x], my.kernel[y], rng)
    return out


def make_product_kstep(mx: Mcms, my: Mcms, k) -> KStepCouplingChain:
    """k-step coupling chain built from product couplings at every step."""
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ValidationError(f"k must be an integer >= 1, got {k!r}")
    layer = product_layer(mx, my)
    return KStepCouplingChain(tuple(layer for _ in range(int(k))))


def kstep_measure(gamma, nu: KStepCouplingChain) -> np.ndarray:
    """``mu_k(x', y') = sum_{x, y} gamma(x, y) nu_{x, y}(x', y')``."""
    n, m = gamma.shape
    return (gamma.ravel() @ nu.composed().reshape(n * m, n * m)).reshape(n, m)


def _check_gamma(mx, my, gamma):
    g = np.asarray(gamma, dtype=float)
    if g.shape != (mx.n, my.n):
        raise MarginalMismatch(f"coupling shape {g.shape} does not match ({mx.n}, {my.n})")
    if (
        np.any(g < -COUPLING_TOL)
        or np.max(np.abs(g.sum(axis=1) - mx.stationary)) > COUPLING_TOL
        or np.max(np.abs(g.sum(axis=0) - my.stationary)) > COUPLING_TOL
    ):
        raise MarginalMismatch("gamma does not couple the stationary distributions")
    return g


def distortion_k(mx: Mcms, my: Mcms, gamma, nu: KStepCouplingChain) -> float:
    """k-step distortion of the pair ``(gamma, nu)``.

    ``sum |d_X(x, x') - d_Y(y, y')| gamma(x, y) mu_k(x', y')`` where ``mu_k``
    pushes ``gamma`` through the k-step coupling ``nu``. Every feasible pair
    gives an upper bound on the k-step GW distance.

    Raises:
        MarginalMismatch: ``gamma`` or ``nu`` is not feasible.
    """
    g = _check_gamma(mx, my, gamma)
    nu.check(mx.kernel, my.kernel)
    mu_k = kstep_measure(g, nu)
    gap = np.abs(mx.metric[:, None, :, None] - my.metric[None, :, None, :])
    return float(np.einsum("xy,xyab,ab->", g, gap, mu_k))


def invariant_gap(label_x, label_y, gamma, nu: KStepCouplingChain) -> float:
    """``sum |l_X(x') - l_Y(y')| mu_k(x', y')``: the left side of the
    stability inequality for a label invariant (labels are ``(n, d)``)."""
    lx = np.asarray(label_x, dtype=float).reshape(len(label_x), -1)
    ly = np.asarray(label_y, dtype=float).reshape(len(label_y), -1)
    cost = np.linalg.norm(lx[:, None, :] - ly[None, :, :], axis=2)
    return float(np.sum(cost * kstep_measure(np.asarray(gamma, dtype=float), nu)))


def random_mcms(n, rng, dim=2, lazy=None) -> Mcms:
    """Random points in the plane with a random reversible kernel.

    The kernel is a random symmetric weight matrix normalized by rows, whose
    stationary distribution is proportional to the row weights.
    """
    pts = rng.random((n, dim))
    metric = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
    w = rng.random((n, n))
    w = w + w.T
    if lazy is not None:
        w += lazy * np.diag(w.sum(axis=1))
    kernel = w / w.sum(axis=1, keepdims=True)
    mu = w.sum(axis=1) / w.sum()
    return validate_mcms(kernel, mu, metric)
