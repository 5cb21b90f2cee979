"""Interpretable relational node features: operator chains over base features.

A learned feature is a base feature combined with a chain of one-hop
aggregations (mean/sum/max/L2 norm over in-, out-, or total neighbors).
Feature values are log-binned after every aggregation step, so deeper
features summarize the binned values of their parents; learning keeps
chains that survive a similarity-based pruning pass. The resulting
definitions transfer verbatim to any other graph of the same directedness.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .base_features import BaseFeature, compute_base_feature, select_valid_base_features
from .graph import Graph

SUMMARIES = ("mean", "sum", "max", "l2norm")
_DIRECTION_SYMBOL = {"in": "Φ⁻", "out": "Φ⁺", "total": "Φ"}


@dataclass(frozen=True)
class RelationalOperator:
    direction: str
    summary: str

    def __post_init__(self):
        if self.direction not in _DIRECTION_SYMBOL:
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.summary not in SUMMARIES:
            raise ValueError(f"unknown summary {self.summary!r}")

    def render(self) -> str:
        return f"{_DIRECTION_SYMBOL[self.direction]}_{self.summary}"


def default_operators(directed: bool) -> tuple[RelationalOperator, ...]:
    """All direction/summary combinations (total-only for undirected graphs)."""
    directions = ("in", "out", "total") if directed else ("total",)
    return tuple(RelationalOperator(d, s) for d in directions for s in SUMMARIES)


@dataclass(frozen=True)
class FeatureDefinition:
    """A base feature plus an ordered operator chain (first applied first)."""

    base: BaseFeature
    chain: tuple[RelationalOperator, ...] = ()

    @property
    def depth(self) -> int:
        return len(self.chain)

    def relational_render(self) -> str:
        if not self.chain:
            return "(x)"
        return "(" + " ∘ ".join(op.render() for op in reversed(self.chain)) + ")"

    def render(self) -> str:
        return f"{self.relational_render()}({self.base.render()})"


def apply_operator(graph: Graph, values: np.ndarray, direction: str, summary: str) -> np.ndarray:
    """Aggregate ``values`` over each node's one-hop neighborhood.

    Empty neighborhoods yield 0 for every summary.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (graph.n,):
        raise ValueError(f"expected a length-{graph.n} vector, got shape {values.shape}")
    adj = graph._adjacency(direction)
    counts = np.diff(adj.indptr)
    srcs = np.repeat(np.arange(graph.n), counts)
    nbr_vals = values[adj.indices]
    if summary == "sum":
        return np.bincount(srcs, weights=nbr_vals, minlength=graph.n)
    if summary == "mean":
        sums = np.bincount(srcs, weights=nbr_vals, minlength=graph.n)
        return np.divide(sums, counts, out=np.zeros(graph.n), where=counts > 0)
    if summary == "max":
        out = np.full(graph.n, -np.inf)
        np.maximum.at(out, srcs, nbr_vals)
        out[counts == 0] = 0.0
        return out
    if summary == "l2norm":
        return np.sqrt(np.bincount(srcs, weights=nbr_vals ** 2, minlength=graph.n))
    raise ValueError(f"unknown summary {summary!r}")


def log_bin(values: np.ndarray, fraction: float) -> np.ndarray:
    """Logarithmic binning: geometrically shrinking node fractions per bin.

    Nodes are sorted ascending; bin 0 takes the first ``ceil(fraction*n)``
    nodes, bin 1 the same fraction of the remainder, and so on. A group of
    equal values is never split: a group straddling the current bin's end is
    deferred whole to the next bin, unless it starts the current bin, in
    which case it absorbs it. ``fraction`` 0 degenerates to the dense rank
    of distinct values.
    """
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ValueError("log binning requires finite values")
    if not 0.0 <= fraction < 1.0:
        raise ValueError(f"bin fraction must be in [0, 1), got {fraction}")
    n = len(values)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if fraction == 0.0:
        _, inverse = np.unique(values, return_inverse=True)
        return inverse.astype(np.int64)
    order = np.argsort(values, kind="stable")
    ranked = values[order]
    bins_ranked = np.empty(n, dtype=np.int64)
    pos, b = 0, 0
    while pos < n:
        end = pos + math.ceil(fraction * (n - pos))
        if end < n and ranked[end - 1] == ranked[end]:
            group_start = int(np.searchsorted(ranked, ranked[end - 1], side="left"))
            if group_start > pos:
                end = group_start
            else:
                end = int(np.searchsorted(ranked, ranked[end - 1], side="right"))
        bins_ranked[pos:end] = b
        pos, b = end, b + 1
    bins = np.empty(n, dtype=np.int64)
    bins[order] = bins_ranked
    return bins


def feature_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Fraction of positions where two bin vectors agree exactly."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape or a.ndim != 1 or len(a) == 0:
        raise ValueError(f"bin vectors must share a nonzero length, got {a.shape} and {b.shape}")
    return float(np.mean(a == b))


def _pairwise_agreement(columns: np.ndarray) -> np.ndarray:
    """All-pairs agreement fractions between bin columns (n x c matrix)."""
    n, c = columns.shape
    if n * c * c <= 200_000_000:
        sims = np.empty((c, c))
        for j in range(c):
            sims[j] = (columns == columns[:, j:j + 1]).mean(axis=0)
        return sims
    from scipy import sparse

    # One-hot encode (node, bin value) pairs; agreement counts are then an
    # inner product, keeping the cost near the number of nonzeros.
    k = int(columns.max()) + 1
    rows = (np.arange(n)[:, None] * k + columns).ravel()
    cols = np.tile(np.arange(c), n)
    onehot = sparse.csr_matrix(
        (np.ones(n * c, dtype=np.int64), (rows, cols)), shape=(n * k, c))
    counts = (onehot.T @ onehot).toarray()
    return counts / n


class _UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def prune_features(candidates, kept_prior, threshold: float):
    """Drop near-duplicate candidate features.

    Builds a similarity graph over candidates plus previously kept features
    (edge when agreement >= ``threshold``) and keeps one representative per
    connected component: lowest depth first, then earliest definition order.
    Previously kept features are always retained, so a component touching one
    keeps no candidates. Returns the surviving candidates in input order.
    """
    if not candidates:
        return []
    entries = list(candidates) + list(kept_prior)
    n_cand = len(candidates)
    columns = np.column_stack([bins for _, bins in entries])
    sims = _pairwise_agreement(columns)
    uf = _UnionFind(len(entries))
    for i in range(len(entries)):
        for j in range(i + 1, len(entries)):
            if sims[i, j] >= threshold:
                uf.union(i, j)
    groups: dict[int, list[int]] = {}
    for i in range(len(entries)):
        groups.setdefault(uf.find(i), []).append(i)
    survivors = []
    for members in groups.values():
        if any(m >= n_cand for m in members):
            continue
        best = min(members, key=lambda m: (entries[m][0].depth, m))
        survivors.append(best)
    return [candidates[i] for i in sorted(survivors)]


def _round_significant(values: np.ndarray, digits: int = 10) -> np.ndarray:
    # Stabilizes bin boundaries against summation-order noise so that feature
    # evaluation is exactly equivariant under node relabeling.
    out = np.asarray(values, dtype=np.float64).copy()
    nz = (out != 0) & np.isfinite(out)
    if nz.any():
        mag = np.floor(np.log10(np.abs(out[nz])))
        scale = np.power(10.0, digits - 1 - mag)
        out[nz] = np.round(out[nz] * scale) / scale
    return out


@dataclass
class FeatureMatrix:
    """Evaluated, log-binned feature values with their shared definitions."""

    definitions: list[FeatureDefinition]
    values: np.ndarray  # n x d, int64 bin indices
    dropped: list[tuple[FeatureDefinition, str]]

    @property
    def n_features(self) -> int:
        return len(self.definitions)

    def select(self, definitions) -> "FeatureMatrix":
        """Restrict to the given definitions (all must be present), keeping order."""
        index = {d: j for j, d in enumerate(self.definitions)}
        cols = [index[d] for d in definitions]
        return FeatureMatrix(list(definitions), self.values[:, cols], list(self.dropped))


def definitions_to_json(definitions) -> str:
    """Serialize feature definitions as a JSON list of {base, params, chain}."""
    items = []
    for d in definitions:
        params = {}
        if d.base.kind == "pagerank":
            params["damping"] = d.base.damping
        elif d.base.kind == "katz":
            params["attenuation"] = d.base.attenuation
        elif d.base.kind == "attribute":
            params["name"] = d.base.attribute
        items.append({
            "base": d.base.kind,
            "params": params,
            "chain": [{"direction": op.direction, "summary": op.summary} for op in d.chain],
        })
    return json.dumps(items, indent=2) + "\n"


def definitions_from_json(text: str) -> list[FeatureDefinition]:
    items = json.loads(text)
    definitions = []
    for item in items:
        params = item.get("params", {})
        kwargs = {}
        if "damping" in params:
            kwargs["damping"] = params["damping"]
        if "attenuation" in params:
            kwargs["attenuation"] = params["attenuation"]
        if "name" in params:
            kwargs["attribute"] = params["name"]
        base = BaseFeature(item["base"], **kwargs)
        chain = tuple(RelationalOperator(o["direction"], o["summary"]) for o in item.get("chain", ()))
        definitions.append(FeatureDefinition(base, chain))
    return definitions


def _as_base_feature(spec) -> BaseFeature:
    if isinstance(spec, BaseFeature):
        return spec
    if isinstance(spec, str):
        return BaseFeature(spec)
    if isinstance(spec, dict):
        spec = dict(spec)
        kind = spec.pop("kind")
        if "name" in spec:
            spec["attribute"] = spec.pop("name")
        return BaseFeature(kind, **spec)
    raise ValueError(f"cannot interpret base feature spec {spec!r}")


def _as_operator(spec) -> RelationalOperator:
    if isinstance(spec, RelationalOperator):
        return spec
    if isinstance(spec, dict):
        return RelationalOperator(spec["direction"], spec["summary"])
    direction, summary = spec
    return RelationalOperator(direction, summary)


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("NETCONTRAST_THREADS", "1")))
    except ValueError:
        return 1


class RelationalFeatureLearner(BaseEstimator):
    """Learn relational feature definitions on one graph; evaluate them on any.

    Parameters
    ----------
    base_features : sequence of kind names / dicts / BaseFeature, optional
        Leaf features. Defaults to the degree/centrality set appropriate for
        the graph's directedness.
    operators : sequence of (direction, summary), optional
        Aggregations combined at each depth. Defaults to every combination
        valid for the graph's directedness.
    depth : int
        Maximum number of chained operators.
    similarity_threshold : float
        Agreement fraction at or above which two features are redundant.
    bin_fraction : float
        Logarithmic-binning transformation parameter.
    """

    def __init__(self, base_features=None, operators=None, depth=3,
                 similarity_threshold=0.7, bin_fraction=0.5):
        self.base_features = base_features
        self.operators = operators
        self.depth = depth
        self.similarity_threshold = similarity_threshold
        self.bin_fraction = bin_fraction

    # -- configuration ----------------------------------------------------

    def _resolved_bases(self, graph: Graph) -> list[BaseFeature]:
        if self.base_features is not None:
            return [_as_base_feature(s) for s in self.base_features]
        if graph.directed:
            kinds = ("in_degree", "out_degree", "total_degree", "pagerank",
                     "betweenness", "katz", "kcore")
        else:
            kinds = ("total_degree", "betweenness", "closeness", "eigenvector",
                     "pagerank", "katz")
        return [BaseFeature(k) for k in kinds]

    def _resolved_operators(self, graph: Graph) -> list[RelationalOperator]:
        if self.operators is None:
            ops = list(default_operators(graph.directed))
        else:
            ops = [_as_operator(s) for s in self.operators]
        if not graph.directed and any(op.direction != "total" for op in ops):
            warnings.warn("in/out operators normalized to total on an undirected graph")
            seen, normalized = set(), []
            for op in ops:
                norm = RelationalOperator("total", op.summary)
                if norm not in seen:
                    seen.add(norm)
                    normalized.append(norm)
            ops = normalized
        return ops

    def _check_params(self):
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")
        if not 0.0 <= self.similarity_threshold <= 1.0:
            raise ValueError("similarity_threshold must be in [0, 1]")
        if not 0.0 <= self.bin_fraction < 1.0:
            raise ValueError("bin_fraction must be in [0, 1)")

    # -- learning ----------------------------------------------------------

    def fit(self, graph: Graph, y=None):
        """Learn feature definitions on ``graph`` (the target network)."""
        self._check_params()
        if graph.n == 0:
            raise ValueError("cannot learn features on an empty graph")
        operators = self._resolved_operators(graph)
        if self.depth > 0 and not operators:
            raise ValueError("at least one operator is required when depth > 0")
        kept_bases, dropped = select_valid_base_features(graph, self._resolved_bases(graph))
        if not kept_bases:
            details = "; ".join(f"{b.render()}: {reason}" for b, reason in dropped)
            raise ValueError(f"no base feature survived screening ({details})")

        # Feature values are binned after every operator application; deeper
        # features therefore aggregate the binned values of their parents.
        binned: dict[FeatureDefinition, np.ndarray] = {}
        kept_all: list[tuple[FeatureDefinition, np.ndarray]] = []
        for base in kept_bases:
            definition = FeatureDefinition(base)
            binned[definition] = self._bin(compute_base_feature(graph, base))
            kept_all.append((definition, binned[definition]))
        level = [d for d, _ in kept_all]
        for _ in range(self.depth):
            specs = [FeatureDefinition(parent.base, parent.chain + (op,))
                     for parent in level for op in operators]
            parents = [parent for parent in level for _ in operators]
            vectors = self._evaluate_candidates(graph, specs, parents, binned)
            candidates = []
            for definition, vec in zip(specs, vectors):
                binned[definition] = self._bin(vec)
                candidates.append((definition, binned[definition]))
            survivors = prune_features(candidates, kept_all, self.similarity_threshold)
            if not survivors:
                break
            kept_all.extend(survivors)
            level = [d for d, _ in survivors]

        self.directed_ = graph.directed
        self.operators_ = operators
        self.definitions_ = [d for d, _ in kept_all]
        self.dropped_base_ = [(FeatureDefinition(b), reason) for b, reason in dropped]
        self.n_features_ = len(self.definitions_)
        self._fit_matrix = FeatureMatrix(
            list(self.definitions_),
            np.column_stack([bins for _, bins in kept_all]).astype(np.int64),
            list(self.dropped_base_),
        )
        return self

    def _bin(self, vec: np.ndarray) -> np.ndarray:
        return log_bin(_round_significant(vec), self.bin_fraction)

    def _evaluate_candidates(self, graph, specs, parents, binned):
        def one(i):
            op = specs[i].chain[-1]
            return apply_operator(graph, binned[parents[i]].astype(np.float64),
                                  op.direction, op.summary)

        threads = _thread_count()
        if threads > 1 and len(specs) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                return list(pool.map(one, range(len(specs))))
        return [one(i) for i in range(len(specs))]

    # -- evaluation / transfer ----------------------------------------------

    def transform(self, graph: Graph) -> FeatureMatrix:
        """Evaluate the learned definitions on ``graph``.

        Columns whose base feature errors on this graph or whose values go
        non-finite are dropped (with a warning) and reported on the result.
        """
        if not hasattr(self, "definitions_"):
            raise ValueError("this learner has not been fitted yet")
        if graph.directed != self.directed_:
            raise ValueError(
                "feature definitions were learned on a "
                f"{'directed' if self.directed_ else 'undirected'} graph and cannot be "
                f"applied to a {'directed' if graph.directed else 'undirected'} one")
        base_bins: dict[BaseFeature, np.ndarray] = {}
        base_err: dict[BaseFeature, str] = {}
        for base in {d.base for d in self.definitions_}:
            try:
                vec = compute_base_feature(graph, base)
                bad = ~np.isfinite(vec)
                if bad.any():
                    base_err[base] = f"non-finite values on {int(bad.sum())} node(s)"
                else:
                    base_bins[base] = self._bin(vec)
            except ValueError as exc:
                base_err[base] = str(exc)

        chain_cache: dict[FeatureDefinition, np.ndarray] = {}

        def evaluate(definition: FeatureDefinition) -> np.ndarray:
            if definition in chain_cache:
                return chain_cache[definition]
            if definition.chain:
                parent = FeatureDefinition(definition.base, definition.chain[:-1])
                op = definition.chain[-1]
                vec = self._bin(apply_operator(graph, evaluate(parent).astype(np.float64),
                                               op.direction, op.summary))
            else:
                vec = base_bins[definition.base]
            chain_cache[definition] = vec
            return vec

        kept_defs, columns, dropped = [], [], []
        for definition in self.definitions_:
            if definition.base in base_err:
                dropped.append((definition, base_err[definition.base]))
                continue
            try:
                columns.append(evaluate(definition))
            except ValueError as exc:
                dropped.append((definition, str(exc)))
                continue
            kept_defs.append(definition)
        for definition, reason in dropped:
            warnings.warn(f"feature {definition.render()} dropped on transfer: {reason}")
        values = (np.column_stack(columns).astype(np.int64)
                  if columns else np.zeros((graph.n, 0), dtype=np.int64))
        return FeatureMatrix(kept_defs, values, dropped)

    def fit_transform(self, graph: Graph, y=None) -> FeatureMatrix:
        return self.fit(graph)._fit_matrix
