"""Ordering unorganized sample trains along their curve.

The trains lie on a closed curve through the origin.  NN-CRUST links each
point to its nearest neighbour and, for points left with a single edge, to
the nearest "half neighbour" lying on the opposite side.  When the edges
form one simple cycle (or path) through all points we have the cyclic
order; :func:`orient` then picks the start on the last coordinate axis and
the direction of travel.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .errors import InsufficientData, NoAxisPoint

# Above this size the neighbour searches go through a k-d tree.
BRUTE_FORCE_LIMIT = 1024


@dataclass(frozen=True)
class Ordering:
    perm: np.ndarray
    closed: bool


def as_cloud(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] < 2:
        raise ValueError("points must be an (n, d+1) array with d >= 1")
    if np.any(np.all(pts == 0.0, axis=1)):
        raise ValueError("point cloud contains the zero vector")
    return pts


def on_axis(points: np.ndarray, axis: int, eps: float = 0.0) -> np.ndarray:
    """Mask of points whose coordinates other than ``axis`` are within ``eps`` of 0."""
    pts = np.atleast_2d(points)
    others = np.delete(np.abs(pts), axis, axis=1)
    return np.all(others <= eps, axis=1)


def _nearest_brute(pts: np.ndarray) -> np.ndarray:
    dist = cdist(pts, pts, "sqeuclidean")
    np.fill_diagonal(dist, np.inf)
    # argmin returns the first minimum, i.e. the lowest index on ties
    return np.argmin(dist, axis=1)


def _nearest_tree(pts: np.ndarray, tree: cKDTree) -> np.ndarray:
    k = min(4, len(pts))
    dist, idx = tree.query(pts, k=k)
    dist = np.where(idx == np.arange(len(pts))[:, None], np.inf, dist)
    # stable argmin over distance-sorted candidates, ties go to the lower index
    order = np.lexsort((idx, dist), axis=1)
    return np.take_along_axis(idx, order[:, :1], axis=1)[:, 0]


def _half_neighbour_brute(pts, i, j):
    """Nearest point s with (p_j - p_i) . (p_s - p_i) < 0, or -1."""
    p = pts[i]
    rel = pts - p
    ok = rel @ (pts[j] - p) < 0
    ok[i] = False
    if not ok.any():
        return -1
    dist = np.einsum("ij,ij->i", rel, rel)
    dist[~ok] = np.inf
    return int(np.argmin(dist))


def _half_neighbours(pts, single, partner, tree=None, k=16):
    """Half neighbour of every ``single[m]`` whose only edge goes to ``partner[m]``."""
    if tree is None or len(single) == 0:
        return np.array([_half_neighbour_brute(pts, i, j) for i, j in zip(single, partner)], dtype=int)
    k = min(k, len(pts))
    dist, idx = tree.query(pts[single], k=k)
    rel = pts[idx] - pts[single][:, None, :]
    direction = pts[partner] - pts[single]
    ok = (np.einsum("mkc,mc->mk", rel, direction) < 0) & (idx != single[:, None])
    dist = np.where(ok, dist, np.inf)
    order = np.lexsort((idx, dist), axis=1)[:, 0]
    out = np.take_along_axis(idx, order[:, None], axis=1)[:, 0]
    found = ok.any(axis=1)
    for m in np.flatnonzero(~found):
        out[m] = _half_neighbour_brute(pts, single[m], partner[m])
    return out


def _cross(o, a, b):
    return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) - (a[..., 1] - o[..., 1]) * (b[..., 0] - o[..., 0])


def _self_crossing(pts: np.ndarray, order: np.ndarray, closed: bool) -> bool:
    if pts.shape[1] != 2:
        # proper crossings are non-generic above two dimensions
        return False
    seq = pts[order]
    if closed:
        seq = np.vstack([seq, seq[:1]])
    a, b = seq[:-1], seq[1:]
    m = len(a)
    for i in range(m - 2):
        j = np.arange(i + 2, m)
        if closed and i == 0:
            j = j[j != m - 1]
        c, d = a[j], b[j]
        o1 = _cross(a[i], b[i], c)
        o2 = _cross(a[i], b[i], d)
        o3 = _cross(c, d, a[i])
        o4 = _cross(c, d, b[i])
        if np.any((o1 * o2 < 0) & (o3 * o4 < 0)):
            return True
    return False


def nn_crust(points) -> Ordering:
    """Order points along the curve they sample.

    Returns the cyclic order as an :class:`Ordering` whose ``closed`` flag
    tells whether the edges formed a cycle (True) or a single open path.

    Raises
    ------
    InsufficientData
        Fewer than three points, a vertex of degree above two, more than
        one component, or a self-crossing chain.
    """
    pts = as_cloud(points)
    n = len(pts)
    if n < 3:
        raise InsufficientData(f"need at least 3 trains, got {n}", stage="nn_crust")

    tree = cKDTree(pts) if n > BRUTE_FORCE_LIMIT else None
    nn = _nearest_brute(pts) if tree is None else _nearest_tree(pts, tree)

    edges = {(min(i, j), max(i, j)) for i, j in enumerate(nn)}
    adj: list[set[int]] = [set() for _ in range(n)]
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)

    single = np.array([i for i in range(n) if len(adj[i]) == 1], dtype=int)
    partner = np.array([next(iter(adj[i])) for i in single], dtype=int)
    for i, s in zip(single, _half_neighbours(pts, single, partner, tree)):
        if s >= 0:
            edges.add((min(i, s), max(i, s)))
    adj = [set() for _ in range(n)]
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)

    degree = np.array([len(a) for a in adj])
    if degree.max() > 2:
        raise InsufficientData("a train has more than two curve neighbours", stage="nn_crust")
    if np.any(degree == 0):
        raise InsufficientData("isolated train", stage="nn_crust")

    ends = np.flatnonzero(degree == 1)
    if len(ends) not in (0, 2):
        raise InsufficientData("trains split into several chains", stage="nn_crust")
    closed = len(ends) == 0
    start = 0 if closed else int(ends.min())

    order = [start]
    prev, cur = -1, start
    while True:
        nxt = [v for v in adj[cur] if v != prev]
        if not nxt:
            break
        # on the cycle both neighbours of the start are candidates: take the lower
        nxt_v = min(nxt)
        if nxt_v == start:
            break
        order.append(nxt_v)
        prev, cur = cur, nxt_v
        if len(order) > n:
            break
    if len(order) != n:
        raise InsufficientData("trains split into several chains", stage="nn_crust")

    perm = np.asarray(order, dtype=int)
    if _self_crossing(pts, perm, closed):
        raise InsufficientData("ordered chain crosses itself", stage="nn_crust")
    return Ordering(perm, closed)


def orient(points, ordering: Ordering, axis_epsilon: float = 0.0) -> Ordering:
    """Rotate and possibly reverse a cyclic order so it runs from the
    ``X_{d+1}``-axis towards the ``X_1``-axis.

    The start is the point on the last axis nearest the origin.  The order
    is kept if the next point is on the last axis too or the previous one
    is on the first axis; otherwise it is reversed.
    """
    pts = as_cloud(points)
    eta = np.asarray(ordering.perm, dtype=int)
    n = len(eta)
    seq = pts[eta]
    last_axis = on_axis(seq, seq.shape[1] - 1, axis_epsilon)
    first_axis = on_axis(seq, 0, axis_epsilon)
    if not last_axis.any():
        raise NoAxisPoint()
    norms = np.linalg.norm(seq, axis=1)
    cand = np.flatnonzero(last_axis)
    k = int(cand[np.argmin(norms[cand])])
    forward = last_axis[(k + 1) % n] or first_axis[(k - 1) % n]
    steps = np.arange(n)
    idx = (k + steps) % n if forward else (k - steps) % n
    return Ordering(eta[idx], ordering.closed)


def order_trains(points, axis_epsilon: float = 0.0) -> np.ndarray:
    """NN-CRUST followed by :func:`orient`; returns the points in curve order."""
    pts = as_cloud(points)
    ordering = orient(pts, nn_crust(pts), axis_epsilon)
    return pts[ordering.perm]
