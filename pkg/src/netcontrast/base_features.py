"""Per-node base features: degrees, centralities, k-core numbers, attributes.

Every feature is a deterministic length-``n`` vector. Features whose
computation fails or produces non-finite values (e.g. closeness on a
disconnected graph) are screened out by :func:`select_valid_base_features`.
Shortest paths are always hop counts, also on weighted graphs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph

BASE_KINDS = (
    "in_degree", "out_degree", "total_degree", "pagerank", "katz",
    "eigenvector", "betweenness", "closeness", "kcore", "attribute",
)


@dataclass(frozen=True)
class BaseFeature:
    """A base-feature specification: the kind tag plus its parameters."""

    kind: str
    damping: float = 0.85        # pagerank only
    attenuation: float = 0.01    # katz only
    attribute: str | None = None

    def __post_init__(self):
        if self.kind not in BASE_KINDS:
            raise ValueError(f"unknown base feature kind {self.kind!r}")
        if not 0.0 < self.damping < 1.0:
            raise ValueError(f"pagerank damping must be in (0, 1), got {self.damping}")
        if self.attenuation <= 0.0:
            raise ValueError(f"katz attenuation must be positive, got {self.attenuation}")
        if self.kind == "attribute" and not self.attribute:
            raise ValueError("attribute features need an attribute name")

    def render(self) -> str:
        if self.kind == "attribute":
            return f"attribute:{self.attribute}"
        if self.kind == "pagerank" and self.damping != 0.85:
            return f"pagerank[damping={self.damping!r}]"
        if self.kind == "katz" and self.attenuation != 0.01:
            return f"katz[attenuation={self.attenuation!r}]"
        return self.kind


def _expanded_edges(graph: Graph):
    """Out-edge arrays ``(srcs, dsts, weights)`` with one entry per stored edge."""
    adj = graph.out
    srcs = np.repeat(np.arange(graph.n), np.diff(adj.indptr))
    return srcs, adj.indices, adj.weights


def _ragged_gather(indptr: np.ndarray, frontier: np.ndarray):
    """Edge-array positions of all out-edges of ``frontier`` nodes."""
    starts = indptr[frontier]
    counts = indptr[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    offsets = np.repeat(np.cumsum(counts) - counts, counts)
    idx = np.arange(total) - offsets + np.repeat(starts, counts)
    return idx, np.repeat(frontier, counts)


def _bfs_distances(graph: Graph, source: int) -> np.ndarray:
    indptr, indices = graph.out.indptr, graph.out.indices
    dist = np.full(graph.n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source])
    level = 0
    while len(frontier):
        idx, _ = _ragged_gather(indptr, frontier)
        targets = indices[idx]
        newly = targets[dist[targets] == -1]
        if len(newly) == 0:
            break
        level += 1
        dist[newly] = level
        frontier = np.unique(newly)
    return dist


def spectral_radius_estimate(graph: Graph, iterations: int = 100) -> float:
    """Power-iteration estimate of the adjacency spectral radius."""
    if graph.n == 0:
        return 0.0
    srcs, dsts, w = _expanded_edges(graph)
    x = np.ones(graph.n)
    rho = 0.0
    for _ in range(iterations):
        y = np.bincount(srcs, weights=w * x[dsts], minlength=graph.n)
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            return 0.0
        rho = norm
        x = y / norm
    return rho


def in_degree(graph: Graph) -> np.ndarray:
    return graph.degree_vector("in")


def out_degree(graph: Graph) -> np.ndarray:
    return graph.degree_vector("out")


def total_degree(graph: Graph) -> np.ndarray:
    return graph.degree_vector("total")


def pagerank(graph: Graph, damping: float = 0.85, tol: float = 1e-10, max_iter: int = 1000) -> np.ndarray:
    """PageRank by power iteration to an L1 residual of ``tol``; sums to 1."""
    n = graph.n
    srcs, dsts, w = _expanded_edges(graph)
    out_w = graph.degree_vector("out")
    dangling = out_w == 0.0
    coef = np.zeros(len(srcs))
    nz = out_w[srcs] > 0
    coef[nz] = w[nz] / out_w[srcs[nz]]
    r = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        base = (1.0 - damping) / n + damping * float(r[dangling].sum()) / n
        r_new = np.full(n, base)
        np.add.at(r_new, dsts, damping * r[srcs] * coef)
        if float(np.abs(r_new - r).sum()) <= tol:
            return r_new
        r = r_new
    return r


def katz(graph: Graph, attenuation: float = 0.01, tol: float = 1e-10, max_iter: int = 10000) -> np.ndarray:
    """Katz centrality: the solution of (I - a*A^T) k = 1 by the geometric series.

    Fails fast when the attenuation reaches 1/spectral-radius, where the
    series diverges.
    """
    n = graph.n
    rho = spectral_radius_estimate(graph)
    if attenuation * rho >= 1.0 - 1e-9:
        raise ValueError(
            f"katz series diverges: attenuation {attenuation} >= 1/spectral radius (~{rho:.6g})")
    srcs, dsts, w = _expanded_edges(graph)
    k = np.ones(n)
    for _ in range(max_iter):
        k_new = 1.0 + attenuation * np.bincount(dsts, weights=w * k[srcs], minlength=n)
        if not np.all(np.isfinite(k_new)) or float(k_new.max(initial=0.0)) > 1e100:
            raise ValueError("katz series diverges: iterates grow without bound")
        if float(np.abs(k_new - k).max(initial=0.0)) <= tol:
            return k_new
        k = k_new
    raise ValueError("katz iteration did not converge")


def eigenvector(graph: Graph, tol: float = 1e-13, max_iter: int = 10000) -> np.ndarray:
    """Dominant right eigenvector of the adjacency matrix, unit L2 norm.

    Power iteration runs on A + I so that graphs with a symmetric spectrum
    (e.g. bipartite) still converge; the shift leaves eigenvectors unchanged.
    """
    n = graph.n
    srcs, dsts, w = _expanded_edges(graph)
    v = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(max_iter):
        u = np.bincount(srcs, weights=w * v[dsts], minlength=n) + v
        norm = float(np.linalg.norm(u))
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("eigenvector centrality is undefined for this graph")
        u /= norm
        if float(np.abs(u - v).max()) <= tol:
            v = u
            break
        v = u
    else:
        raise ValueError("eigenvector centrality power iteration did not converge")
    if v.max() < np.abs(v).max():  # orient the dominant entry positive
        v = -v
    return v


def betweenness(graph: Graph) -> np.ndarray:
    """Shortest-path betweenness (hop-count paths), normalized by the pair count.

    Directed graphs divide by (n-1)(n-2); undirected by (n-1)(n-2)/2.
    """
    n = graph.n
    indptr, indices = graph.out.indptr, graph.out.indices
    bc = np.zeros(n)
    if n < 3:
        return bc
    for s in range(n):
        dist = np.full(n, -1, dtype=np.int64)
        dist[s] = 0
        sigma = np.zeros(n)
        sigma[s] = 1.0
        frontier = np.array([s])
        level = 0
        dag_levels = []
        while len(frontier):
            idx, esrc = _ragged_gather(indptr, frontier)
            targets = indices[idx]
            undiscovered = dist[targets] == -1
            dist[targets[undiscovered]] = level + 1
            on_dag = dist[targets] == level + 1
            es, et = esrc[on_dag], targets[on_dag]
            if len(et) == 0:
                break
            np.add.at(sigma, et, sigma[es])
            dag_levels.append((es, et))
            frontier = np.unique(targets[undiscovered])
            level += 1
        delta = np.zeros(n)
        for es, et in reversed(dag_levels):
            np.add.at(delta, es, sigma[es] / sigma[et] * (1.0 + delta[et]))
        delta[s] = 0.0
        bc += delta
    # Undirected runs count each unordered pair from both endpoints, so the
    # same divisor yields the per-pair normalization for both cases.
    return bc / ((n - 1) * (n - 2))


def closeness(graph: Graph) -> np.ndarray:
    """Closeness centrality (n-1)/sum-of-distances; NaN where any node is unreachable."""
    n = graph.n
    out = np.zeros(n)
    if n == 1:
        return out
    for v in range(n):
        dist = _bfs_distances(graph, v)
        if np.any(dist < 0):
            out[v] = np.nan
        else:
            out[v] = (n - 1) / float(dist.sum())
    return out


def kcore(graph: Graph) -> np.ndarray:
    """Peeling (degeneracy) numbers on total degree.

    Directed graphs peel on in-count + out-count, so a reciprocal pair
    contributes 2 to each endpoint.
    """
    n = graph.n
    if n == 0:
        return np.zeros(0)
    if graph.directed:
        srcs_out = np.repeat(np.arange(n), np.diff(graph.out.indptr))
        srcs_in = np.repeat(np.arange(n), np.diff(graph.inc.indptr))
        srcs = np.concatenate([srcs_out, srcs_in])
        nbrs = np.concatenate([graph.out.indices, graph.inc.indices])
        order = np.argsort(srcs, kind="stable")
        srcs, nbrs = srcs[order], nbrs[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, srcs + 1, 1)
        np.cumsum(indptr, out=indptr)
    else:
        indptr, nbrs = graph.out.indptr, graph.out.indices
    deg = np.diff(indptr).astype(np.int64)
    md = int(deg.max(initial=0))
    # Batagelj-Zaversnik bucket peeling.
    bin_start = np.zeros(md + 2, dtype=np.int64)
    np.add.at(bin_start, deg + 1, 1)
    np.cumsum(bin_start, out=bin_start)
    bin_start = bin_start[:-1].copy()
    vert = np.argsort(deg, kind="stable").astype(np.int64)
    pos = np.empty(n, dtype=np.int64)
    pos[vert] = np.arange(n)
    core = deg.copy()
    for i in range(n):
        v = int(vert[i])
        for u in nbrs[indptr[v]:indptr[v + 1]]:
            u = int(u)
            if core[u] > core[v]:
                du, pu = core[u], pos[u]
                pw = bin_start[du]
                w = int(vert[pw])
                if u != w:
                    vert[pu], vert[pw] = w, u
                    pos[u], pos[w] = pw, pu
                bin_start[du] += 1
                core[u] -= 1
    return core.astype(np.float64)


def compute_base_feature(graph: Graph, feature: BaseFeature) -> np.ndarray:
    """Evaluate one base feature over all nodes of ``graph``."""
    if graph.n == 0:
        raise ValueError("cannot compute features on an empty graph")
    kind = feature.kind
    if kind == "in_degree":
        return in_degree(graph)
    if kind == "out_degree":
        return out_degree(graph)
    if kind == "total_degree":
        return total_degree(graph)
    if kind == "pagerank":
        return pagerank(graph, feature.damping)
    if kind == "katz":
        return katz(graph, feature.attenuation)
    if kind == "eigenvector":
        return eigenvector(graph)
    if kind == "betweenness":
        return betweenness(graph)
    if kind == "closeness":
        return closeness(graph)
    if kind == "kcore":
        return kcore(graph)
    if kind == "attribute":
        if feature.attribute not in graph.attributes:
            raise ValueError(f"graph has no attribute {feature.attribute!r}")
        return graph.attributes[feature.attribute].astype(np.float64).copy()
    raise ValueError(f"unknown base feature kind {kind!r}")


def select_valid_base_features(graph: Graph, features):
    """Screen base features, dropping any whose vector errors or is non-finite.

    Returns ``(kept, dropped)`` where ``dropped`` pairs each rejected feature
    with a human-readable reason. The order of kept features is preserved.
    """
    kept, dropped = [], []
    for feature in features:
        try:
            vec = compute_base_feature(graph, feature)
        except ValueError as exc:
            dropped.append((feature, str(exc)))
            continue
        bad = ~np.isfinite(vec)
        if bad.any():
            dropped.append((feature, f"non-finite values on {int(bad.sum())} node(s)"))
        else:
            kept.append(feature)
    return kept, dropped
