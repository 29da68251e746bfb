"""Exact discrete optimal transport.

``ot_solve`` runs a transportation simplex (potentials plus cycle pivots on a
spanning-tree basis) compiled with numba. ``pairwise_row_ot`` batches many
small solves that share one cost matrix, which is the hot loop of the WL
recursion. ``wasserstein_1d`` is the closed form on the real line.
``lp_vertex_oracle`` brute-forces the transportation polytope and shares no
code with the solver; it exists to check it on tiny instances.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numba
import numpy as np
from scipy.spatial.distance import cdist

from .core import PROB_TOL, as_prob_vec
from .exceptions import (
    DimensionMismatch,
    EmptyDistribution,
    InfeasibleMarginals,
    NoConvergence,
    TooLarge,
    ValidationError,
)

COUPLING_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class Coupling:
    plan: np.ndarray
    source: np.ndarray
    target: np.ndarray

    def check(self, tol=COUPLING_TOL):
        """Raise :class:`InfeasibleMarginals` if the marginals are off by more than ``tol``."""
        if np.any(self.plan < -tol):
            raise InfeasibleMarginals("coupling has negative mass")
        if np.max(np.abs(self.plan.sum(axis=1) - self.source), initial=0.0) > tol:
            raise InfeasibleMarginals("row sums do not match the source marginal")
        if np.max(np.abs(self.plan.sum(axis=0) - self.target), initial=0.0) > tol:
            raise InfeasibleMarginals("column sums do not match the target marginal")
        return self


@dataclass(frozen=True, eq=False)
class OtResult:
    value: float
    coupling: Coupling


# Transportation simplex ---------------------------------------------------
#
# Nodes 0..n-1 are sources, n..n+m-1 are targets. A basis is a spanning tree
# of n+m-1 cells (degenerate zero-flow cells included).


@numba.njit(cache=True, nogil=True)
def _least_cost_start(cost, a, b, bi, bj, bflow, where):
    # Greedy basis: visit cells by increasing cost, fill each as far as the
    # remaining supply and demand allow, then retire exactly one of its row or
    # column. Retiring one line per cell yields n+m-1 cells forming a tree.
    n, m = cost.shape
    ar = a.copy()
    br = b.copy()
    row_open = np.ones(n, dtype=np.bool_)
    col_open = np.ones(m, dtype=np.bool_)
    rows_left = n
    cols_left = m
    e = 0
    order = np.argsort(cost.ravel(), kind="mergesort")
    for idx in order:
        i = idx // m
        j = idx % m
        if not row_open[i] or not col_open[j]:
            continue
        x = max(min(ar[i], br[j]), 0.0)
        bi[e] = i
        bj[e] = j
        bflow[e] = x
        where[i, j] = e
        e += 1
        ar[i] -= x
        br[j] -= x
        if rows_left == 1:
            col_open[j] = False
            cols_left -= 1
        elif cols_left == 1 or ar[i] <= br[j]:
            row_open[i] = False
            rows_left -= 1
        else:
            col_open[j] = False
            cols_left -= 1
        if rows_left == 0 or cols_left == 0:
            break


@numba.njit(cache=True, nogil=True)
def _tree_adjacency(bi, bj, n, m, start, nbr, edge):
    # CSR adjacency of the basis tree: neighbors of node u are
    # nbr[start[u]:start[u+1]], reached through basis slot edge[...].
    nodes = n + m
    start[:] = 0
    for e in range(bi.size):
        start[bi[e] + 1] += 1
        start[n + bj[e] + 1] += 1
    for u in range(nodes):
        start[u + 1] += start[u]
    fill = start[:nodes].copy()
    for e in range(bi.size):
        r = bi[e]
        c = n + bj[e]
        nbr[fill[r]] = c
        edge[fill[r]] = e
        fill[r] += 1
        nbr[fill[c]] = r
        edge[fill[c]] = e
        fill[c] += 1


@numba.njit(cache=True, nogil=True)
def _transport_simplex(cost, a, b, max_iter):
    """Return (value, plan, status); status 0 is optimal, 1 hit ``max_iter``."""
    n, m = cost.shape
    nodes = n + m
    nb = nodes - 1
    bi = np.empty(nb, dtype=np.int64)
    bj = np.empty(nb, dtype=np.int64)
    bflow = np.zeros(nb)
    where = np.full((n, m), -1, dtype=np.int64)
    _least_cost_start(cost, a, b, bi, bj, bflow, where)
    pot = np.zeros(nodes)
    seen = np.zeros(nodes, dtype=np.bool_)
    queue = np.empty(nodes, dtype=np.int64)
    parent = np.empty(nodes, dtype=np.int64)
    parent_edge = np.empty(nodes, dtype=np.int64)
    start = np.zeros(nodes + 1, dtype=np.int64)
    nbr = np.empty(2 * nb, dtype=np.int64)
    edge = np.empty(2 * nb, dtype=np.int64)
    path = np.empty(nodes, dtype=np.int64)
    scale = 1.0
    for i in range(n):
        for j in range(m):
            if cost[i, j] > scale:
                scale = cost[i, j]
    tol = 1e-13 * scale
    cells = n * m
    block = max(int(np.sqrt(cells)), min(cells, 32))
    cursor = 0
    degenerate_run = 0
    status = 1
    for _ in range(max_iter):
        _tree_adjacency(bi, bj, n, m, start, nbr, edge)
        # Potentials: pot[row] + pot[n + col] = cost on basic cells, with the
        # sign of column potentials flipped so reduced cost is c - u - v.
        seen[:] = False
        seen[0] = True
        pot[0] = 0.0
        queue[0] = 0
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            for s in range(start[u], start[u + 1]):
                w = nbr[s]
                if not seen[w]:
                    e = edge[s]
                    pot[w] = cost[bi[e], bj[e]] - pot[u]
                    seen[w] = True
                    queue[tail] = w
                    tail += 1
        # Block pricing normally; Bland's rule (first improving cell) during
        # long degenerate runs, which guarantees termination.
        ei = -1
        ej = -1
        if degenerate_run > nodes:
            for idx in range(cells):
                i = idx // m
                j = idx % m
                if where[i, j] < 0 and cost[i, j] - pot[i] - pot[n + j] < -tol:
                    ei = i
                    ej = j
                    break
        else:
            best = -tol
            scanned = 0
            in_block = 0
            while scanned < cells:
                idx = cursor
                cursor += 1
                if cursor == cells:
                    cursor = 0
                scanned += 1
                in_block += 1
                i = idx // m
                j = idx % m
                if where[i, j] < 0:
                    rc = cost[i, j] - pot[i] - pot[n + j]
                    if rc < best:
                        best = rc
                        ei = i
                        ej = j
                if in_block == block:
                    if ei >= 0:
                        break
                    in_block = 0
        if ei < 0:
            status = 0
            break
        # Tree path from row ei to column ej.
        target = n + ej
        parent[:] = -1
        parent[ei] = ei
        queue[0] = ei
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            if u == target:
                break
            for s in range(start[u], start[u + 1]):
                w = nbr[s]
                if parent[w] < 0:
                    parent[w] = u
                    parent_edge[w] = edge[s]
                    queue[tail] = w
                    tail += 1
        # Walking back from column ej, edge signs alternate starting with minus.
        length = 0
        node = target
        while node != ei:
            path[length] = parent_edge[node]
            length += 1
            node = parent[node]
        theta = np.inf
        leave = -1
        leave_key = cells
        bland = degenerate_run > nodes
        for t in range(0, length, 2):
            e = path[t]
            f = bflow[e]
            key = bi[e] * m + bj[e]
            if f < theta or (bland and f == theta and key < leave_key):
                theta = f
                leave = e
                leave_key = key
        if theta < 0.0:
            theta = 0.0
        for t in range(length):
            e = path[t]
            if t % 2 == 0:
                bflow[e] = max(bflow[e] - theta, 0.0)
            else:
                bflow[e] += theta
        where[bi[leave], bj[leave]] = -1
        bi[leave] = ei
        bj[leave] = ej
        bflow[leave] = theta
        where[ei, ej] = leave
        if theta <= 0.0:
            degenerate_run += 1
        else:
            degenerate_run = 0
    flow = np.zeros((n, m))
    value = 0.0
    for e in range(nb):
        flow[bi[e], bj[e]] = bflow[e]
        value += cost[bi[e], bj[e]] * bflow[e]
    return value, flow, status


@numba.njit(cache=True, nogil=True)
def _support_ot(cost, a, b, max_iter):
    # Drop zero-mass rows/columns; Diracs are solved in closed form.
    n, m = cost.shape
    sa = np.flatnonzero(a > 0.0)
    sb = np.flatnonzero(b > 0.0)
    plan = np.zeros((n, m))
    if sa.size == 1:
        value = 0.0
        for q in sb:
            plan[sa[0], q] = b[q]
            value += cost[sa[0], q] * b[q]
        return value, plan, 0
    if sb.size == 1:
        value = 0.0
        for p in sa:
            plan[p, sb[0]] = a[p]
            value += cost[p, sb[0]] * a[p]
        return value, plan, 0
    sub = np.empty((sa.size, sb.size))
    for p in range(sa.size):
        for q in range(sb.size):
            sub[p, q] = cost[sa[p], sb[q]]
    value, subplan, status = _transport_simplex(sub, a[sa], b[sb], max_iter)
    for p in range(sa.size):
        for q in range(sb.size):
            plan[sa[p], sb[q]] = subplan[p, q]
    return value, plan, status


@numba.njit(cache=True, nogil=True)
def _pairwise_row_ot(cost, rows_x, rows_y, max_iter):
    nx = rows_x.shape[0]
    ny = rows_y.shape[0]
    out = np.empty((nx, ny))
    worst = 0
    for i in range(nx):
        sa = np.flatnonzero(rows_x[i] > 0.0)
        wa = rows_x[i][sa]
        for j in range(ny):
            sb = np.flatnonzero(rows_y[j] > 0.0)
            wb = rows_y[j][sb]
            if sa.size == 1:
                s = 0.0
                for q in range(sb.size):
                    s += cost[sa[0], sb[q]] * wb[q]
                out[i, j] = s
            elif sb.size == 1:
                s = 0.0
                for p in range(sa.size):
                    s += cost[sa[p], sb[0]] * wa[p]
                out[i, j] = s
            else:
                sub = np.empty((sa.size, sb.size))
                for p in range(sa.size):
                    for q in range(sb.size):
                        sub[p, q] = cost[sa[p], sb[q]]
                val, _, status = _transport_simplex(sub, wa, wb, max_iter)
                if status != 0:
                    worst = status
                out[i, j] = val
    return out, worst


def _max_iter(n, m):
    return 50 * (n + m) * (n + m) + 1000


def _check_problem(cost, source, target):
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2:
        raise DimensionMismatch(f"cost must be 2-D, got shape {c.shape}")
    try:
        a = as_prob_vec(source, name="source")
        b = as_prob_vec(target, name="target")
    except ValidationError as exc:
        raise InfeasibleMarginals(str(exc)) from None
    if c.shape != (a.size, b.size):
        raise DimensionMismatch(f"cost shape {c.shape} does not match marginals ({a.size}, {b.size})")
    if not np.all(np.isfinite(c)) or np.any(c < 0):
        raise ValidationError("cost entries must be finite and nonnegative")
    return c, a, b


def ot_solve(cost, source, target) -> OtResult:
    """Exact optimal transport between two discrete measures.

    Args:
        cost: ``(n, m)`` nonnegative cost matrix.
        source: length-``n`` probability vector (zeros allowed).
        target: length-``m`` probability vector (zeros allowed).

    Returns:
        The optimal value together with an optimal coupling. Only the value is
        contractual; when several couplings are optimal any one may come back.

    Raises:
        InfeasibleMarginals: a marginal is not a probability vector.
        NoConvergence: the pivot limit was reached (not expected in practice).
    """
    c, a, b = _check_problem(cost, source, target)
    # Push round-off in the totals onto the target so both sides match.
    b = b * (a.sum() / b.sum())
    value, plan, status = _support_ot(np.ascontiguousarray(c), a, b, _max_iter(*c.shape))
    if status != 0:
        raise NoConvergence("transportation simplex hit its pivot limit")
    return OtResult(float(value), Coupling(plan, np.asarray(source, float), np.asarray(target, float)))


def ot_value(cost, source, target):
    """Optimal value only, skipping validation. Callers guarantee valid input."""
    c = np.ascontiguousarray(cost, dtype=float)
    value, _, status = _support_ot(c, np.asarray(source, float), np.asarray(target, float), _max_iter(*c.shape))
    if status != 0:
        raise NoConvergence("transportation simplex hit its pivot limit")
    return float(value)


def pairwise_row_ot(cost, rows_x, rows_y):
    """``out[i, j] = OT(cost, rows_x[i], rows_y[j])`` for all row pairs.

    Args:
        cost: ``(n, m)`` ground cost shared by every problem.
        rows_x: ``(p, n)`` matrix whose rows are probability vectors.
        rows_y: ``(q, m)`` matrix whose rows are probability vectors.
    """
    c = np.ascontiguousarray(cost, dtype=float)
    rx = np.ascontiguousarray(rows_x, dtype=float)
    ry = np.ascontiguousarray(rows_y, dtype=float)
    if rx.shape[1] != c.shape[0] or ry.shape[1] != c.shape[1]:
        raise DimensionMismatch(
            f"rows of shape {rx.shape} and {ry.shape} do not fit cost of shape {c.shape}"
        )
    out, status = _pairwise_row_ot(c, rx, ry, _max_iter(*c.shape))
    if status != 0:
        raise NoConvergence("transportation simplex hit its pivot limit")
    return out


def _as_points(points, weights, side):
    p = np.asarray(points, dtype=float).ravel()
    if p.size == 0:
        raise EmptyDistribution(f"{side} distribution has no atoms")
    w = as_prob_vec(weights, name=f"{side} weights")
    if w.size != p.size:
        raise DimensionMismatch(f"{side}: {p.size} points but {w.size} weights")
    if not np.all(np.isfinite(p)):
        raise ValidationError(f"{side} points must be finite")
    return p, w


def wasserstein_1d(a_points, a_weights, b_points, b_weights):
    """l1-Wasserstein distance between two weighted point sets on the line.

    Integrates ``|Fa^-1(t) - Fb^-1(t)|`` over ``t`` in ``[0, 1]``; both quantile
    functions are step functions, so the integral is a finite sum over the
    merged cumulative-weight breakpoints.
    """
    pa, wa = _as_points(a_points, a_weights, "a")
    pb, wb = _as_points(b_points, b_weights, "b")
    oa, ob = np.argsort(pa, kind="stable"), np.argsort(pb, kind="stable")
    pa, wa, pb, wb = pa[oa], wa[oa], pb[ob], wb[ob]
    ca, cb = np.cumsum(wa), np.cumsum(wb)
    ca /= ca[-1]
    cb /= cb[-1]
    breaks = np.union1d(np.concatenate(([0.0], ca)), cb)
    breaks = breaks[(breaks >= 0.0) & (breaks <= 1.0)]
    widths = np.diff(breaks)
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    qa = pa[np.minimum(np.searchsorted(ca, mids, side="left"), pa.size - 1)]
    qb = pb[np.minimum(np.searchsorted(cb, mids, side="left"), pb.size - 1)]
    return float(np.sum(np.abs(qa - qb) * widths))


def wasserstein_1d_pairwise(a_points, a_rows, b_points, b_rows):
    """All pairwise 1-D Wasserstein distances between two families of measures.

    Row ``i`` of ``a_rows`` is a weight vector over ``a_points``; likewise for
    ``b``. Returns the ``(len(a_rows), len(b_rows))`` matrix of distances,
    computed as the L1 distance between CDFs on the merged support.
    """
    pa = np.asarray(a_points, dtype=float).ravel()
    pb = np.asarray(b_points, dtype=float).ravel()
    ra = np.atleast_2d(np.asarray(a_rows, dtype=float))
    rb = np.atleast_2d(np.asarray(b_rows, dtype=float))
    if ra.shape[1] != pa.size or rb.shape[1] != pb.size:
        raise DimensionMismatch("weight rows do not match the number of points")
    grid = np.union1d(pa, pb)
    if grid.size == 1:
        return np.zeros((ra.shape[0], rb.shape[0]))
    widths = np.diff(grid)
    # CDF at each grid point except the last (where both equal one).
    ind_a = (pa[:, None] <= grid[None, :-1]).astype(float)
    ind_b = (pb[:, None] <= grid[None, :-1]).astype(float)
    fa = (ra @ ind_a) * widths
    fb = (rb @ ind_b) * widths
    return cdist(fa, fb, metric="cityblock")


def lp_vertex_oracle(cost, source, target, max_cells=20):
    """Brute-force optimum of a tiny transportation problem.

    Every vertex of the transportation polytope is a basic solution supported
    on a spanning tree of the complete bipartite graph K(n, m). We enumerate
    all ``n + m - 1`` cell subsets, keep the acyclic ones, solve the tree flow
    by leaf elimination, and return the cheapest nonnegative one.

    Raises:
        TooLarge: ``n * m > max_cells``.
    """
    c, a, b = _check_problem(cost, source, target)
    n, m = c.shape
    if n * m > max_cells:
        raise TooLarge(f"{n}x{m} instance exceeds the {max_cells}-cell oracle limit")
    cells = [(i, j) for i in range(n) for j in range(m)]
    best = np.inf
    for basis in itertools.combinations(range(n * m), n + m - 1):
        flow = _tree_flow([cells[e] for e in basis], a, b, n, m)
        if flow is None:
            continue
        best = min(best, sum(c[i, j] * f for (i, j), f in flow.items()))
    return float(best)


def _tree_flow(edges, a, b, n, m):
    # Nodes 0..n-1 are rows, n..n+m-1 columns. Reject cyclic edge sets.
    parent = list(range(n + m))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    adj = {u: set() for u in range(n + m)}
    for i, j in edges:
        ri, rj = find(i), find(n + j)
        if ri == rj:
            return None
        parent[ri] = rj
        adj[i].add(n + j)
        adj[n + j].add(i)
    supply = np.concatenate([a, b]).tolist()
    flow = {}
    leaves = [u for u in adj if len(adj[u]) == 1]
    while leaves:
        u = leaves.pop()
        if len(adj[u]) != 1:
            continue
        (v,) = adj[u]
        f = supply[u]
        if f < -PROB_TOL:
            return None
        edge = (u, v - n) if u < n else (v, u - n)
        flow[edge] = f
        supply[v] -= f
        supply[u] = 0.0
        adj[u].clear()
        adj[v].discard(u)
        if len(adj[v]) == 1:
            leaves.append(v)
    return flow
