"""Labeled graphs, their q-Markov chains, relabeling, and the WL color test.

Also provides the averaging-based WWL label propagation used as a baseline,
and constructors for the small graph families that the test suite uses to
probe where the WL distance and the WL test agree or differ.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .core import Lmmc, as_label_matrix, validate_lmmc
from .exceptions import InvalidEdge, IsolatedVertex, ValidationError
from .transport import ot_value

DEFAULT_Q = 0.6
LABEL_SCHEMES = ("raw", "degree", "scalar_f2", "vector_g")


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """Undirected simple graph with one label vector per vertex.

    Build with :func:`make_graph`; ``edges`` is an ``(E, 2)`` array with
    ``u < v`` in every row, sorted lexicographically.
    """

    n: int
    edges: np.ndarray
    labels: np.ndarray

    @property
    def degrees(self):
        deg = np.zeros(self.n, dtype=np.int64)
        np.add.at(deg, self.edges.ravel(), 1)
        return deg

    def neighbors(self):
        """Adjacency lists, one sorted list per vertex."""
        adj = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(int(v))
            adj[v].append(int(u))
        return [sorted(a) for a in adj]

    def adjacency(self):
        a = np.zeros((self.n, self.n))
        if len(self.edges):
            a[self.edges[:, 0], self.edges[:, 1]] = 1.0
            a[self.edges[:, 1], self.edges[:, 0]] = 1.0
        return a

    def with_labels(self, labels):
        return LabeledGraph(self.n, self.edges, as_label_matrix(labels, self.n))

    def permuted(self, perm):
        """Graph where new vertex ``i`` is old vertex ``perm[i]``."""
        perm = np.asarray(perm)
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(perm.size)
        return make_graph(self.n, inverse[self.edges], self.labels[perm])


def make_graph(n, edges, labels=None) -> LabeledGraph:
    """Validate and build a :class:`LabeledGraph`.

    Args:
        n: number of vertices.
        edges: iterable of vertex pairs; each undirected edge must appear once.
        labels: ``(n, d)`` or length-``n`` labels. Defaults to the constant 1.

    Raises:
        InvalidEdge: self-loops, out-of-range endpoints or repeated edges.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValidationError(f"vertex count must be a positive integer, got {n!r}")
    n = int(n)
    e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    if e.size == 0:
        e = np.zeros((0, 2), dtype=np.int64)
    if e.ndim != 2 or e.shape[1] != 2:
        raise InvalidEdge(f"edges must be pairs, got shape {e.shape}")
    if np.any(e < 0) or np.any(e >= n):
        raise InvalidEdge(f"edge endpoint outside 0..{n - 1}")
    if np.any(e[:, 0] == e[:, 1]):
        raise InvalidEdge("self-loops are not allowed")
    e = np.sort(e, axis=1)
    uniq = np.unique(e, axis=0)
    if len(uniq) != len(e):
        raise InvalidEdge("duplicate edge")
    lab = np.ones((n, 1)) if labels is None else labels
    return LabeledGraph(n, _frozen_int(uniq), as_label_matrix(lab, n))


def _frozen_int(a):
    a = np.array(a, dtype=np.int64, copy=True)
    a.setflags(write=False)
    return a


def graph_to_lmmc(g: LabeledGraph, q=DEFAULT_Q) -> Lmmc:
    """The lazy random walk on ``g`` that stays put with probability ``q``.

    Non-isolated vertices move to a uniformly random neighbor with
    probability ``1 - q``; isolated vertices self-loop. The stationary
    distribution is proportional to ``max(deg, 1)``.
    """
    if not 0.0 <= q < 1.0:
        raise ValidationError(f"q must lie in [0, 1), got {q!r}")
    deg = g.degrees
    a = g.adjacency()
    kernel = np.where(deg[:, None] > 0, (1.0 - q) * a / np.maximum(deg, 1)[:, None], 0.0)
    kernel[np.diag_indices(g.n)] = np.where(deg > 0, q, 1.0)
    weight = np.maximum(deg, 1).astype(float)
    return validate_lmmc(kernel, weight / weight.sum(), g.labels)


def relabel(g: LabeledGraph, scheme) -> LabeledGraph:
    """Augment or replace vertex labels.

    Schemes:
        ``raw``: labels unchanged.
        ``degree``: the degree as a scalar label.
        ``scalar_f2``: ``deg(v) + 1/|V|`` (original labels dropped).
        ``vector_g``: ``(label(v), deg(v), 1/|V|)``, an injective augmentation.
    """
    deg = g.degrees.astype(float)
    if scheme == "raw":
        return g
    if scheme == "degree":
        return g.with_labels(deg)
    if scheme == "scalar_f2":
        return g.with_labels(deg + 1.0 / g.n)
    if scheme == "vector_g":
        return g.with_labels(np.column_stack([g.labels, deg, np.full(g.n, 1.0 / g.n)]))
    raise ValidationError(f"unknown label scheme {scheme!r}; expected one of {LABEL_SCHEMES}")


# WL color refinement ------------------------------------------------------


@dataclass(frozen=True)
class WlColoring:
    """Joint color refinement of several graphs; ``rounds[r][g]`` is the color
    vector of graph ``g`` after ``r`` rounds."""

    rounds: list


def _label_key(row):
    # Bitwise label identity, with -0.0 folded into 0.0.
    return (row + 0.0).tobytes()


def wl_colorings(graphs, rounds) -> WlColoring:
    """Refine colors jointly so that ids are comparable across graphs.

    A vertex's next color is the interned pair (own color, sorted multiset of
    neighbor colors). Interning assigns fresh integers to unseen keys, so two
    colors agree exactly when their keys do.
    """
    table = {}

    def intern(key):
        return table.setdefault(key, len(table))

    adjs = [g.neighbors() for g in graphs]
    current = [np.array([intern(("label", _label_key(row))) for row in g.labels]) for g in graphs]
    history = [current]
    for _ in range(rounds):
        current = [
            np.array([intern((int(c[v]), tuple(sorted(int(c[u]) for u in adj[v])))) for v in range(len(adj))])
            for c, adj in zip(current, adjs)
        ]
        history.append(current)
    return WlColoring(history)


def wl_test(g1: LabeledGraph, g2: LabeledGraph, max_rounds=None):
    """Run the WL test on two labeled graphs.

    Color multisets are compared after every round, starting with the initial
    labels (so graphs of different sizes are distinguished at round 0).
    Stops early once the joint partition stops refining.

    Returns:
        The first round whose color multisets differ, or ``None`` if the
        graphs are never distinguished within ``max_rounds`` (default
        ``|V1| + |V2|``).
    """
    if max_rounds is None:
        max_rounds = g1.n + g2.n
    table = {}

    def intern(key):
        return table.setdefault(key, len(table))

    adj1, adj2 = g1.neighbors(), g2.neighbors()
    c1 = [intern(("label", _label_key(row))) for row in g1.labels]
    c2 = [intern(("label", _label_key(row))) for row in g2.labels]
    n_colors = len(set(c1) | set(c2))
    for r in range(max_rounds + 1):
        if Counter(c1) != Counter(c2):
            return r
        if r == max_rounds:
            break
        c1, c2 = (
            [intern((c[v], tuple(sorted(c[u] for u in adj[v])))) for v in range(len(adj))]
            for c, adj in ((c1, adj1), (c2, adj2))
        )
        refined = len(set(c1) | set(c2))
        if refined == n_colors:
            # Stable partition: later rounds only rename colors.
            return None
        n_colors = refined
    return None


# WWL-style averaged labels ------------------------------------------------


def wwl_labels(g: LabeledGraph, k) -> np.ndarray:
    """Stack ``k + 1`` rounds of neighbor averaging.

    Each round replaces a label by the mean of itself and the average of its
    neighbors' labels. Returns an ``(n, d * (k + 1))`` matrix whose first
    ``d`` columns are the original labels.

    Raises:
        IsolatedVertex: some vertex has no neighbors.
    """
    if isinstance(k, bool) or int(k) != k or k < 0:
        raise ValidationError(f"k must be a nonnegative integer, got {k!r}")
    deg = g.degrees
    if np.any(deg == 0):
        raise IsolatedVertex(f"vertex {int(np.argmin(deg))} is isolated")
    walk = g.adjacency() / deg[:, None]
    stages = [np.asarray(g.labels)]
    for _ in range(int(k)):
        prev = stages[-1]
        stages.append(0.5 * (prev + walk @ prev))
    return np.hstack(stages)


def wwl_hat_distance(g1: LabeledGraph, g2: LabeledGraph, k) -> float:
    """Wasserstein distance between stacked averaged labels.

    Vertices carry their degree-proportional stationary mass.
    """
    if g1.labels.shape[1] != g2.labels.shape[1]:
        raise ValidationError("label dimensions differ")
    l1, l2 = wwl_labels(g1, k), wwl_labels(g2, k)
    d1, d2 = g1.degrees.astype(float), g2.degrees.astype(float)
    return ot_value(cdist(l1, l2), d1 / d1.sum(), d2 / d2.sum())


# Graph families -----------------------------------------------------------


def path_graph(n, labels=None):
    return make_graph(n, [(i, i + 1) for i in range(n - 1)], labels)


def cycle_graph(n, labels=None):
    return make_graph(n, [(i, (i + 1) % n) for i in range(n)], labels)


def star_graph(leaves, labels=None):
    """``K_{1, leaves}`` with the center at vertex 0."""
    return make_graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)], labels)


def claw():
    return star_graph(3)


def disjoint_union(*graphs):
    edges, labels, offset = [], [], 0
    for g in graphs:
        edges.extend((g.edges + offset).tolist())
        labels.append(g.labels)
        offset += g.n
    return make_graph(offset, edges, np.vstack(labels))


def separating_pair(n):
    """Two trees on ``3n + 2`` vertices with labels in ``{-1, 0, 1}``.

    The first is a path of ``n + 2`` zero-labeled vertices whose ``n``
    interior vertices each get one extra leaf labeled ``+1`` and one labeled
    ``-1``. The second is a star with a zero-labeled center and ``n`` leaves
    labeled ``+1``, ``n`` labeled ``-1`` and ``n + 1`` labeled ``0``.
    Neighbor-averaged labels agree in distribution on the two graphs at every
    depth, while the one-step label distributions around the zero-labeled
    vertices do not.
    """
    if n < 1:
        raise ValidationError("n must be positive")
    spine = n + 2
    edges = [(i, i + 1) for i in range(spine - 1)]
    labels = [0.0] * spine
    nxt = spine
    for v in range(1, n + 1):
        for sign in (1.0, -1.0):
            edges.append((v, nxt))
            labels.append(sign)
            nxt += 1
    g1 = make_graph(nxt, edges, labels)
    g2 = star_graph(3 * n + 1, [0.0] + [1.0] * n + [-1.0] * n + [0.0] * (n + 1))
    return g1, g2


def random_graph(n, p, rng, labels=None):
    """Erdos-Renyi ``G(n, p)`` from a numpy ``Generator``."""
    iu = np.triu_indices(n, 1)
    keep = rng.random(iu[0].size) < p
    return make_graph(n, np.column_stack([iu[0][keep], iu[1][keep]]), labels)


def random_permutation(g, rng):
    return g.permuted(rng.permutation(g.n))


def double_edge_swap(g, rng, swaps=1, max_tries=100):
    """Degree-preserving rewiring: replace edges ``ab, cd`` by ``ad, cb``."""
    edges = {tuple(e) for e in g.edges.tolist()}
    done = 0
    for _ in range(max_tries):
        if done == swaps or len(edges) < 2:
            break
        pool = sorted(edges)
        i, j = rng.choice(len(pool), 2, replace=False)
        (a, b), (c, d) = pool[i], pool[j]
        if rng.random() < 0.5:
            c, d = d, c
        new1, new2 = tuple(sorted((a, d))), tuple(sorted((c, b)))
        if len({a, b, c, d}) < 4 or new1 in edges or new2 in edges:
            continue
        edges -= {pool[i], pool[j]}
        edges |= {new1, new2}
        done += 1
    return make_graph(g.n, sorted(edges), g.labels)
