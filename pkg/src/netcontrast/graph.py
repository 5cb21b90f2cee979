"""Attributed directed/undirected graphs with dense integer node ids.

Graphs are immutable after construction and safe to share across workers.
Adjacency is stored in CSR-like arrays (``indptr``/``indices``/``weights``)
for both edge directions; undirected graphs alias the two.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

VALID_DIRECTIONS = ("in", "out", "total")


class EdgeListParseError(ValueError):
    """Malformed edge-list input; carries the offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class AttributeTableError(ValueError):
    """Invalid node-attribute table (unknown node, bad value, duplicate entry)."""


@dataclass
class _Adjacency:
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray


def _build_adjacency(n: int, srcs: np.ndarray, dsts: np.ndarray, weights: np.ndarray) -> _Adjacency:
    order = np.lexsort((dsts, srcs))
    srcs, dsts, weights = srcs[order], dsts[order], weights[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, srcs + 1, 1)
    np.cumsum(indptr, out=indptr)
    return _Adjacency(indptr, dsts.astype(np.int64), weights.astype(np.float64))


@dataclass
class Graph:
    """A simple graph (no parallel edges) with real-valued node attributes.

    Node ids are dense integers in ``[0, n)``; ``labels`` maps each id back to
    its original string label. ``edge_count`` counts ordered pairs for directed
    graphs and unordered pairs for undirected ones.
    """

    directed: bool
    node_count: int
    edge_count: int
    labels: tuple[str, ...]
    out: _Adjacency
    inc: _Adjacency
    attributes: dict[str, np.ndarray] = field(default_factory=dict)
    _label_ids: dict[str, int] = field(default_factory=dict, repr=False)
    _total: _Adjacency | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self._label_ids:
            self._label_ids = {lbl: i for i, lbl in enumerate(self.labels)}

    @property
    def n(self) -> int:
        return self.node_count

    def node_id(self, label: str) -> int:
        return self._label_ids[label]

    def _adjacency(self, direction: str) -> _Adjacency:
        if direction == "out":
            return self.out
        if direction == "in":
            return self.inc
        if direction == "total":
            if not self.directed:
                return self.out
            if self._total is None:
                self._total = self._merge_total()
            return self._total
        raise ValueError(f"unknown direction {direction!r}; expected one of {VALID_DIRECTIONS}")

    def _merge_total(self) -> _Adjacency:
        # Union of in- and out-neighbors; a node linked both ways appears once
        # with the two edge weights summed.
        srcs_out = np.repeat(np.arange(self.n), np.diff(self.out.indptr))
        srcs_in = np.repeat(np.arange(self.n), np.diff(self.inc.indptr))
        srcs = np.concatenate([srcs_out, srcs_in])
        dsts = np.concatenate([self.out.indices, self.inc.indices])
        wts = np.concatenate([self.out.weights, self.inc.weights])
        if len(srcs) == 0:
            return _build_adjacency(self.n, srcs, dsts, wts)
        keys = srcs * self.n + dsts
        uniq, inverse = np.unique(keys, return_inverse=True)
        merged_w = np.zeros(len(uniq))
        np.add.at(merged_w, inverse, wts)
        return _build_adjacency(self.n, uniq // self.n, uniq % self.n, merged_w)

    def neighbors(self, v: int, direction: str = "total") -> list[tuple[int, float]]:
        """Neighbors of ``v`` as ``(node id, weight)`` pairs.

        ``direction`` is one of ``"in"``, ``"out"``, ``"total"``; for
        undirected graphs all three agree.
        """
        if not 0 <= v < self.n:
            raise ValueError(f"node id {v} out of range [0, {self.n})")
        adj = self._adjacency(direction)
        lo, hi = adj.indptr[v], adj.indptr[v + 1]
        return [(int(i), float(w)) for i, w in zip(adj.indices[lo:hi], adj.weights[lo:hi])]

    def degree_vector(self, direction: str = "total") -> np.ndarray:
        """Weighted degree per node (sum of incident edge weights in ``direction``)."""
        adj = self._adjacency(direction)
        csum = np.concatenate([[0.0], np.cumsum(adj.weights)])
        return csum[adj.indptr[1:]] - csum[adj.indptr[:-1]]

    def neighbor_counts(self, direction: str = "total") -> np.ndarray:
        return np.diff(self._adjacency(direction).indptr)

    def edges(self):
        """Iterate edges as ``(src id, dst id, weight)``, each once.

        Undirected edges are reported with ``src <= dst``.
        """
        for v in range(self.n):
            lo, hi = self.out.indptr[v], self.out.indptr[v + 1]
            for t, w in zip(self.out.indices[lo:hi], self.out.weights[lo:hi]):
                if self.directed or v <= t:
                    yield v, int(t), float(w)

    def with_attributes(self, columns: dict[str, np.ndarray]) -> "Graph":
        """Return a copy of this graph with extra attribute columns."""
        merged = dict(self.attributes)
        for name, col in columns.items():
            col = np.asarray(col, dtype=np.float64)
            if col.shape != (self.n,):
                raise AttributeTableError(f"attribute {name!r} has length {col.shape}, expected ({self.n},)")
            if not np.all(np.isfinite(col)):
                raise AttributeTableError(f"attribute {name!r} contains non-finite values")
            merged[name] = col
        return Graph(self.directed, self.node_count, self.edge_count, self.labels,
                     self.out, self.inc, merged, self._label_ids, self._total)

    def to_edge_list_text(self) -> str:
        """Serialize to the edge-list text format (round-trips through ``parse_edge_list``)."""
        lines = [f"# directed: {'true' if self.directed else 'false'}"]
        canonical = all(lbl == str(i) for i, lbl in enumerate(self.labels))
        if canonical:
            lines.append(f"# nodes: {self.n}")
        else:
            linked = np.zeros(self.n, dtype=bool)
            linked[self.out.indices] = True
            starts = np.diff(self.out.indptr) > 0
            linked |= starts
            linked[self.inc.indices] = True
            for v in np.flatnonzero(~linked):
                lines.append(f"# node: {self.labels[v]}")
        for s, t, w in self.edges():
            tail = "" if w == 1.0 else f" {w!r}"
            lines.append(f"{self.labels[s]} {self.labels[t]}{tail}")
        return "\n".join(lines) + "\n"

    def to_dot(self, values: np.ndarray | None = None) -> str:
        """DOT export for external layout tools, optionally color-annotated.

        ``values`` (length ``n``) are mapped onto a sequential color scale and
        emitted as node ``fillcolor`` attributes.
        """
        from .plotting import sequential_color

        kind, sep = ("digraph", "->") if self.directed else ("graph", "--")
        lines = [f"{kind} G {{"]
        if values is not None:
            values = np.asarray(values, dtype=np.float64)
            lo, hi = float(np.min(values)), float(np.max(values))
            span = hi - lo if hi > lo else 1.0
            for v in range(self.n):
                color = sequential_color((values[v] - lo) / span)
                lines.append(f'  "{self.labels[v]}" [style=filled, fillcolor="{color}"];')
        else:
            for v in range(self.n):
                lines.append(f'  "{self.labels[v]}";')
        for s, t, w in self.edges():
            lines.append(f'  "{self.labels[s]}" {sep} "{self.labels[t]}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def from_edge_array(n: int, edges: list[tuple[int, int, float]], directed: bool,
                    labels: tuple[str, ...] | None = None) -> Graph:
    """Build a Graph from integer-id edges; duplicates collapse (first weight kept)."""
    if labels is None:
        labels = tuple(str(i) for i in range(n))
    dedup: dict[tuple[int, int], float] = {}
    for s, t, w in edges:
        key = (s, t) if directed else (min(s, t), max(s, t))
        dedup.setdefault(key, w)
    edge_count = len(dedup)
    if dedup:
        ss, tt, ww = map(np.asarray, zip(*[(s, t, w) for (s, t), w in dedup.items()]))
    else:
        ss = tt = np.zeros(0, dtype=np.int64)
        ww = np.zeros(0)
    if directed:
        out = _build_adjacency(n, ss, tt, ww)
        inc = _build_adjacency(n, tt, ss, ww)
    else:
        loop = ss == tt
        out = _build_adjacency(n, np.concatenate([ss, tt[~loop]]), np.concatenate([tt, ss[~loop]]),
                               np.concatenate([ww, ww[~loop]]))
        inc = out
    return Graph(directed, n, edge_count, labels, out, inc)


def parse_edge_list(text, directed: bool | None = None) -> Graph:
    """Parse edge-list text: one ``src dst [weight]`` per line, ``#`` comments.

    Tokens may be separated by whitespace or commas. Node ids are assigned
    densely in order of first appearance; duplicate edges collapse to the
    first occurrence; self-loops are retained. Recognized directives:
    ``# directed: true|false``, ``# nodes: <count>`` (declares labels
    ``0..count-1``), and ``# node: <label>``.

    ``directed=None`` defers to a ``# directed`` header (default undirected).
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if hasattr(text, "read"):
        text = text.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")

    labels: dict[str, int] = {}

    def nid(tok: str) -> int:
        return labels.setdefault(tok, len(labels))

    raw_edges: list[tuple[int, int, float]] = []
    header_directed: bool | None = None
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            lowered = body.lower()
            if lowered.startswith("directed:"):
                value = lowered.split(":", 1)[1].strip()
                if value not in ("true", "false"):
                    raise EdgeListParseError(line_no, f"bad directed header value {value!r}")
                header_directed = value == "true"
            elif lowered.startswith("nodes:"):
                value = body.split(":", 1)[1].strip()
                if not value.isdigit():
                    raise EdgeListParseError(line_no, f"bad node count {value!r}")
                for i in range(int(value)):
                    nid(str(i))
            elif lowered.startswith("node:"):
                nid(body.split(":", 1)[1].strip())
            continue
        tokens = line.replace(",", " ").split()
        if len(tokens) not in (2, 3):
            raise EdgeListParseError(line_no, f"expected 2 or 3 tokens, got {len(tokens)}")
        weight = 1.0
        if len(tokens) == 3:
            try:
                weight = float(tokens[2])
            except ValueError:
                raise EdgeListParseError(line_no, f"non-numeric weight {tokens[2]!r}") from None
            if not np.isfinite(weight):
                raise EdgeListParseError(line_no, f"non-finite weight {tokens[2]!r}")
        raw_edges.append((nid(tokens[0]), nid(tokens[1]), weight))

    if directed is None:
        directed = header_directed if header_directed is not None else False
    label_tuple = tuple(sorted(labels, key=labels.get))
    return from_edge_array(len(labels), raw_edges, directed, label_tuple)


def attach_attributes(graph: Graph, rows, encoding: dict | None = None) -> Graph:
    """Attach attribute columns from ``(node label, column, raw value)`` rows.

    ``encoding`` maps categorical raw values to reals and takes precedence
    over numeric parsing. Every node must be covered by every column that
    appears; unknown labels, uncovered categorical values, and duplicate
    ``(node, column)`` entries are errors.
    """
    encoding = encoding or {}
    columns: dict[str, dict[int, float]] = {}
    for label, column, raw in rows:
        label = str(label)
        if label not in graph._label_ids:
            raise AttributeTableError(f"unknown node label {label!r}")
        v = graph._label_ids[label]
        cells = columns.setdefault(str(column), {})
        if v in cells:
            raise AttributeTableError(f"duplicate entry for node {label!r}, column {column!r}")
        if raw in encoding:
            value = float(encoding[raw])
        else:
            try:
                value = float(raw)
            except (TypeError, ValueError):
                raise AttributeTableError(
                    f"categorical value {raw!r} in column {column!r} not covered by the encoding") from None
        cells[v] = value
    out_cols: dict[str, np.ndarray] = {}
    for name, cells in columns.items():
        if len(cells) != graph.n:
            missing = sorted(set(range(graph.n)) - set(cells))
            raise AttributeTableError(
                f"column {name!r} misses {len(missing)} node(s), e.g. {graph.labels[missing[0]]!r}")
        col = np.empty(graph.n)
        for v, val in cells.items():
            col[v] = val
        out_cols[name] = col
    return graph.with_attributes(out_cols) if out_cols else graph


def read_attribute_csv(text) -> list[tuple[str, str, str]]:
    """Read a wide attribute CSV (``node,<column>,...``) into long-form rows."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        return []
    if not header or header[0].strip() != "node":
        raise AttributeTableError("attribute CSV must start with a 'node' column")
    rows = []
    for record in reader:
        if not record:
            continue
        for name, value in zip(header[1:], record[1:]):
            rows.append((record[0], name, value))
    return rows


def write_node_table(graph: Graph) -> str:
    """Node-table CSV export: ``node,<attr>,...`` with one row per node."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = sorted(graph.attributes)
    writer.writerow(["node"] + names)
    for v in range(graph.n):
        writer.writerow([graph.labels[v]] + [repr(float(graph.attributes[a][v])) for a in names])
    return buf.getvalue()
