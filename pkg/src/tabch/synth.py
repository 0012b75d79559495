"""Synthetic road-like test graphs.

Nodes are uniform points in the unit square, each joined to its nearest
neighbours; weights are scaled Euclidean lengths.  Components are chained
together afterwards so the graph is connected.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .graph import InputGraph

WEIGHT_SCALE = 10_000


def geometric_graph(n: int, seed: int = 0, neighbors: int = 3, oneway: float = 0.0) -> InputGraph:
    """Connected kNN graph on ``n`` random points.

    With ``neighbors=3`` the graph has roughly ``4n`` directed arcs.  A
    fraction ``oneway`` of the edges is made one-way (random direction); the
    chaining edges that ensure connectivity are always two-way.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    if n == 1:
        return InputGraph(1, [], [], [], [], [])
    k = min(neighbors, n - 1)
    _, idx = cKDTree(pts).query(pts, k=k + 1)
    u = np.repeat(np.arange(n), k)
    v = idx[:, 1:].reshape(-1)
    a, b = np.minimum(u, v), np.maximum(u, v)
    pairs = np.unique(np.stack([a, b], axis=1), axis=0)
    a, b = pairs[:, 0], pairs[:, 1]

    ncomp, labels = connected_components(
        coo_matrix((np.ones(len(a)), (a, b)), shape=(n, n)), directed=False)
    if ncomp > 1:
        reps = np.array([np.flatnonzero(labels == c)[0] for c in range(ncomp)])
        a = np.concatenate([a, reps[:-1]])
        b = np.concatenate([b, reps[1:]])
    chain = np.zeros(len(a), dtype=bool)
    chain[len(pairs):] = True

    length = np.linalg.norm(pts[a] - pts[b], axis=1)
    w = np.maximum(1, np.rint(length * WEIGHT_SCALE)).astype(np.uint32)
    fwd = np.ones(len(a), dtype=bool)
    bwd = np.ones(len(a), dtype=bool)
    if oneway > 0:
        one = (rng.random(len(a)) < oneway) & ~chain
        flip = rng.random(len(a)) < 0.5
        fwd[one & flip] = False
        bwd[one & ~flip] = False
    return InputGraph(n, a, b, w, fwd, bwd)


def random_graph(n: int, m: int, seed: int = 0, max_weight: int = 100,
                 zero_weights: bool = False) -> InputGraph:
    """Uniform random one-way arcs; used by oracle tests, not connected in general."""
    rng = np.random.default_rng(seed)
    u = rng.integers(0, n, m)
    v = rng.integers(0, n, m)
    lo = 0 if zero_weights else 1
    w = rng.integers(lo, max_weight + 1, m)
    return InputGraph(n, u, v, w, np.ones(m, bool), np.zeros(m, bool))
