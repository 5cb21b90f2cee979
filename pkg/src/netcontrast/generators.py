"""Seedable random-graph generators: Gilbert, Price, and a variable-out-degree Price variant.

All generators use numpy's PCG64 generator, so a given seed reproduces the
exact same edge list on any platform.
"""

from __future__ import annotations

import math

import numpy as np

from .graph import Graph, from_edge_array


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def gilbert_graph(n: int, p: float, directed: bool = False, seed: int = 0) -> Graph:
    """G(n, p) random graph: each node pair linked independently with probability ``p``.

    No self-loops. Runs in O(n + expected edges) via geometric jumps over the
    pair index space.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must be in [0, 1], got {p}")
    if n < 0:
        raise ValueError("node count must be nonnegative")
    edges: list[tuple[int, int, float]] = []
    if p == 1.0:
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                if directed or i < j:
                    edges.append((i, j, 1.0))
        return from_edge_array(n, edges, directed)
    if p > 0.0:
        rng = _rng(seed)
        lp = math.log1p(-p)
        if directed:
            # Row v has n-1 slots (all targets except v itself).
            v, w = 0, -1
            while v < n:
                w += 1 + int(math.log1p(-rng.random()) / lp)
                while v < n and w >= n - 1:
                    w -= n - 1
                    v += 1
                if v < n:
                    t = w if w < v else w + 1
                    edges.append((v, t, 1.0))
        else:
            # Row v has v slots (targets 0..v-1).
            v, w = 1, -1
            while v < n:
                w += 1 + int(math.log1p(-rng.random()) / lp)
                while v < n and w >= v:
                    w -= v
                    v += 1
                if v < n:
                    edges.append((v, w, 1.0))
    return from_edge_array(n, edges, directed)


def _grow_preferential(n: int, out_degrees, rng: np.random.Generator) -> Graph:
    # Each existing node is sampled with probability proportional to
    # (in-degree + 1) via a repeated-targets urn; targets per step are distinct.
    urn = [0]
    edges: list[tuple[int, int, float]] = []
    for j in range(1, n):
        k = min(out_degrees(j), j)
        chosen: set[int] = set()
        while len(chosen) < k:
            t = urn[rng.integers(len(urn))]
            if t not in chosen:
                chosen.add(t)
        for t in sorted(chosen):
            edges.append((j, t, 1.0))
        urn.extend(sorted(chosen))
        urn.append(j)
    return from_edge_array(n, edges, directed=True)


def price_graph(n: int, m_out: int, seed: int = 0) -> Graph:
    """Directed preferential-attachment growth with a fixed out-degree per new node.

    Node ``j`` attaches ``min(m_out, j)`` out-edges to distinct existing
    targets, each drawn with probability proportional to in-degree + 1.
    """
    if n < 1:
        raise ValueError("node count must be at least 1")
    if m_out < 1:
        raise ValueError("out-degree must be at least 1")
    return _grow_preferential(n, lambda j: m_out, _rng(seed))


def enhanced_price_graph(kappa, probs, n: int, seed: int = 0) -> Graph:
    """Price variant drawing each new node's out-degree from ``kappa`` with weights ``probs``."""
    kappa = list(kappa)
    probs = np.asarray(list(probs), dtype=np.float64)
    if len(kappa) != len(probs):
        raise ValueError(f"kappa and probs lengths differ ({len(kappa)} vs {len(probs)})")
    if len(kappa) == 0:
        raise ValueError("kappa must be non-empty")
    if any(int(k) != k or k < 1 for k in kappa):
        raise ValueError("all out-degree choices must be positive integers")
    if np.any(probs < 0):
        raise ValueError("probabilities must be nonnegative")
    if abs(float(probs.sum()) - 1.0) > 1e-9:
        raise ValueError(f"probabilities must sum to 1, got {float(probs.sum())}")
    if n < 1:
        raise ValueError("node count must be at least 1")
    kappa = [int(k) for k in kappa]
    probs = probs / probs.sum()
    rng = _rng(seed)
    return _grow_preferential(n, lambda j: kappa[rng.choice(len(kappa), p=probs)], rng)
