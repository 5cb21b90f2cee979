"""Command-line interface: generate graphs, learn features, embed, score, plot.

Exit codes: 0 success, 2 input/IO error, 3 semantic/config error. All file
artifacts are written atomically (temp file + rename) and, for a fixed input
and seed, reproduce byte-identically (the embed report additionally records
the wall time, which naturally varies between runs).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time

import numpy as np

from .generators import enhanced_price_graph, gilbert_graph, price_graph
from .graph import EdgeListParseError, Graph, parse_edge_list
from .metrics import score_embeddings
from .pipeline import PipelineConfig, contrast_networks
from .plotting import scatter_svg
from .relational import definitions_to_json


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_graph(path: str, directed: bool | None) -> Graph:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return parse_edge_list(handle.read(), directed=directed)
    except OSError as exc:
        raise CliError(2, f"cannot read {path}: {exc}") from exc
    except EdgeListParseError as exc:
        raise CliError(2, f"{path}: {exc}") from exc


def _load_config(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise CliError(2, f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(2, f"config {path} is not valid JSON: {exc}") from exc
    try:
        return PipelineConfig.from_dict(data)
    except ValueError as exc:
        raise CliError(3, f"config {path}: {exc}") from exc


# -- artifact writers -------------------------------------------------------


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _embedding_rows(result):
    k = result.contrast.Y_target.shape[1]
    yield ["node", "network"] + [f"cpc{j + 1}" for j in range(k)]
    for label, row in zip(result.labels_target, result.contrast.Y_target):
        yield [label, "T"] + [repr(float(v)) for v in row]
    for label, row in zip(result.labels_background, result.contrast.Y_background):
        yield [label, "B"] + [repr(float(v)) for v in row]


def _loadings_rows(result):
    k = result.contrast.W.shape[1]
    yield ["feature", "relational_function", "base_feature"] + [f"cpc{j + 1}" for j in range(k)]
    for definition, row in zip(result.definitions, result.contrast.W):
        yield ([definition.render(), definition.relational_render(), definition.base.render()]
               + [repr(float(v)) for v in row])


def _report_dict(result, config: PipelineConfig) -> dict:
    contrast = result.contrast
    return {
        "alpha": contrast.alpha,
        "alpha_history": list(contrast.alpha_history),
        "converged": contrast.converged,
        "eigenvalues": [float(v) for v in contrast.eigenvalues],
        "epsilon": contrast.epsilon,
        "d": result.n_features,
        "d_prime": int(contrast.W.shape[1]),
        "standardize_mode": config.standardize_mode,
        "seed": config.seed,
        "n_target": len(result.labels_target),
        "n_background": len(result.labels_background),
        "dropped_features": [{"feature": d.render(), "reason": reason}
                             for d, reason in result.dropped],
        "wall_time_s": round(result.seconds, 3),
    }


def _feature_matrix_rows(labels, matrix):
    yield ["node"] + [d.render() for d in matrix.definitions]
    for label, row in zip(labels, matrix.values):
        yield [label] + [int(v) for v in row]


def _read_embedding_csv(path: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            rows = list(reader)
    except OSError as exc:
        raise CliError(2, f"cannot read {path}: {exc}") from exc
    if not header or header[:2] != ["node", "network"] or len(header) < 3 \
            or any(not c.startswith("cpc") for c in header[2:]):
        raise CliError(2, f"{path}: malformed embedding header {header!r}")
    labels = {"T": [], "B": []}
    points = {"T": [], "B": []}
    for row in rows:
        if not row:
            continue
        if len(row) != len(header) or row[1] not in ("T", "B"):
            raise CliError(2, f"{path}: malformed embedding row {row!r}")
        try:
            values = [float(v) for v in row[2:]]
        except ValueError:
            raise CliError(2, f"{path}: non-numeric embedding row {row!r}") from None
        labels[row[1]].append(row[0])
        points[row[1]].append(values)
    return (labels["T"], np.asarray(points["T"], dtype=np.float64).reshape(len(points["T"]), -1),
            labels["B"], np.asarray(points["B"], dtype=np.float64).reshape(len(points["B"]), -1))


# -- subcommands -------------------------------------------------------------


def _cmd_gen(args) -> int:
    try:
        if args.model == "gilbert":
            graph = gilbert_graph(args.n, args.p, directed=args.directed, seed=args.seed)
        elif args.model == "price":
            graph = price_graph(args.n, args.m, seed=args.seed)
        else:
            kappa = [int(v) for v in args.kappa.split(",")]
            probs = [float(v) for v in args.probs.split(",")]
            graph = enhanced_price_graph(kappa, probs, args.n, seed=args.seed)
    except ValueError as exc:
        raise CliError(2, f"generation failed: {exc}") from exc
    _atomic_write(args.out, graph.to_edge_list_text())
    print(f"n={graph.node_count} l={graph.edge_count}")
    return 0


def _run_pipeline(args):
    config = _load_config(args.config)
    graph_t = _load_graph(args.target, args.directed)
    graph_b = _load_graph(args.background, args.directed)
    try:
        return contrast_networks(graph_t, graph_b, config), config
    except ValueError as exc:
        raise CliError(3, str(exc)) from exc


def _cmd_embed(args) -> int:
    result, config = _run_pipeline(args)
    out_dir = args.out_dir or config.output_dir
    _atomic_write(os.path.join(out_dir, "embedding.csv"), _csv_text(_embedding_rows(result)))
    _atomic_write(os.path.join(out_dir, "loadings.csv"), _csv_text(_loadings_rows(result)))
    _atomic_write(os.path.join(out_dir, "report.json"),
                  json.dumps(_report_dict(result, config), indent=2, sort_keys=True) + "\n")
    print(f"d={result.n_features} d_prime={result.contrast.W.shape[1]} "
          f"alpha={result.contrast.alpha:.6g} iterations={len(result.contrast.alpha_history)}")
    return 0


def _cmd_features(args) -> int:
    result, config = _run_pipeline(args)
    out_dir = args.out_dir or config.output_dir
    _atomic_write(os.path.join(out_dir, "features.json"), definitions_to_json(result.definitions))
    _atomic_write(os.path.join(out_dir, "target_features.csv"),
                  _csv_text(_feature_matrix_rows(result.labels_target, result.matrix_target)))
    _atomic_write(os.path.join(out_dir, "background_features.csv"),
                  _csv_text(_feature_matrix_rows(result.labels_background, result.matrix_background)))
    print(f"d={result.n_features}")
    return 0


def _cmd_metrics(args) -> int:
    _, Y_t, _, Y_b = _read_embedding_csv(args.embedding)
    if len(Y_t) == 0 or len(Y_b) == 0:
        raise CliError(3, "embedding CSV must contain both T and B rows")
    try:
        report = score_embeddings(Y_t, Y_b, k=args.k)
    except ValueError as exc:
        raise CliError(3, str(exc)) from exc
    print(f"dispersion_ratio={report.dispersion_ratio:.6g} "
          f"bhattacharyya={report.bhattacharyya:.6g} "
          f"kl_divergence={report.kl_divergence:.6g}")
    if args.out:
        _atomic_write(args.out, report.to_json())
    return 0


def _cmd_plot(args) -> int:
    labels_t, Y_t, labels_b, Y_b = _read_embedding_csv(args.embedding)
    if Y_t.shape[1] < 2 or Y_b.shape[1] < 2:
        raise CliError(3, "plot needs at least two embedding columns")
    color_values = None
    if args.color_by:
        if not args.features:
            raise CliError(3, "--color-by requires --features with a feature-matrix CSV")
        try:
            with open(args.features, "r", encoding="utf-8") as handle:
                reader = csv.reader(handle)
                header = next(reader, None)
                rows = list(reader)
        except OSError as exc:
            raise CliError(2, f"cannot read {args.features}: {exc}") from exc
        if not header or header[0] != "node":
            raise CliError(2, f"{args.features}: malformed feature-matrix header")
        if args.color_by not in header:
            raise CliError(3, f"feature column {args.color_by!r} not present in {args.features}")
        col = header.index(args.color_by)
        by_node = {row[0]: float(row[col]) for row in rows if row}
        wanted = labels_t if args.color_network == "T" else labels_b
        missing = [lbl for lbl in wanted if lbl not in by_node]
        if missing:
            raise CliError(3, f"feature values missing for node(s) {missing[:5]!r}")
        color_values = np.array([by_node[lbl] for lbl in wanted])
    svg = scatter_svg(Y_t, Y_b, color_values=color_values,
                      color_network=args.color_network, color_label=args.color_by)
    _atomic_write(args.out, svg)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netcontrast",
        description="Find and explain structural patterns unique to a target network "
                    "relative to a background network.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic network as an edge-list file")
    gen_sub = gen.add_subparsers(dest="model", required=True)
    g_gilbert = gen_sub.add_parser("gilbert", help="G(n, p) random graph")
    g_gilbert.add_argument("--n", type=int, required=True)
    g_gilbert.add_argument("--p", type=float, required=True)
    g_gilbert.add_argument("--directed", action="store_true")
    g_price = gen_sub.add_parser("price", help="preferential attachment, fixed out-degree")
    g_price.add_argument("--n", type=int, required=True)
    g_price.add_argument("--m", type=int, required=True, help="out-edges per new node")
    g_enh = gen_sub.add_parser("enhanced_price", help="preferential attachment, drawn out-degree")
    g_enh.add_argument("--n", type=int, required=True)
    g_enh.add_argument("--kappa", required=True, help="comma-separated out-degree choices")
    g_enh.add_argument("--probs", required=True, help="comma-separated probabilities (sum 1)")
    for sp in (g_gilbert, g_price, g_enh):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", required=True)

    def add_pipeline_args(sp):
        sp.add_argument("target", help="target network edge-list file")
        sp.add_argument("background", help="background network edge-list file")
        sp.add_argument("--config", help="pipeline config JSON")
        sp.add_argument("--out-dir", help="output directory (default: config output_dir)")
        group = sp.add_mutually_exclusive_group()
        group.add_argument("--directed", dest="directed", action="store_true", default=None)
        group.add_argument("--undirected", dest="directed", action="store_false", default=None)

    embed = sub.add_parser("embed", help="full pipeline: features, transfer, contrastive embedding")
    add_pipeline_args(embed)
    features = sub.add_parser("features", help="learn features and emit both feature matrices")
    add_pipeline_args(features)

    metrics = sub.add_parser("metrics", help="contrast-quality metrics for an embedding CSV")
    metrics.add_argument("embedding")
    metrics.add_argument("--k", type=int, default=1, help="neighbor rank for the KL estimate")
    metrics.add_argument("--out", help="write the metric report JSON here")

    plot = sub.add_parser("plot", help="SVG scatter of an embedding CSV")
    plot.add_argument("embedding")
    plot.add_argument("--out", required=True)
    plot.add_argument("--color-by", help="feature column (canonical name) to color nodes by")
    plot.add_argument("--features", help="feature-matrix CSV holding the color column")
    plot.add_argument("--color-network", choices=["T", "B"], default="T")
    return parser


_COMMANDS = {
    "gen": _cmd_gen,
    "embed": _cmd_embed,
    "features": _cmd_features,
    "metrics": _cmd_metrics,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry():
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
