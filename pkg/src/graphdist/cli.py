"""Command-line front end.

Every command reads and validates all of its inputs before writing
anything, then writes its artifacts plus a ``manifest.json`` that records
the resolved configuration, SHA-256 hashes of the inputs and of every
artifact. Nothing time-dependent is recorded, so reruns with the same
inputs and seed are byte-identical.

Exit codes: 0 ok, 2 parse error, 3 unknown metric, 4 graphs not aligned,
5 labels do not match the matrix, 6 invalid parameters.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import warnings
from pathlib import Path

import numpy as np

from . import analysis, ingest, io, synth
from .errors import InvalidParams, LabelMismatch, NotAligned, PairError, ParseError
from .metrics import REGISTRY, UnknownMetric, get_metric

EXIT_OK, EXIT_PARSE, EXIT_METRIC, EXIT_ALIGN, EXIT_LABELS, EXIT_PARAMS = 0, 2, 3, 4, 5, 6


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class Run:
    """Collects artifacts in memory and writes them (plus a manifest) at the end."""

    def __init__(self, args, command):
        self.out = Path(args.out)
        self.command = command
        self.config = {"seed": args.seed, "threads": args.threads, "format": args.format}
        self.inputs = {}
        self.artifacts = {}

    def add_input(self, path):
        self.inputs[str(path)] = _sha256(path)

    def add(self, name, text):
        self.artifacts[name] = text

    def commit(self, extra=None) -> None:
        manifest = {
            "command": self.command,
            "config": self.config,
            "inputs": dict(sorted(self.inputs.items())),
            "artifacts": {
                name: hashlib.sha256(text.encode()).hexdigest() for name, text in sorted(self.artifacts.items())
            },
        }
        manifest.update(extra or {})
        self.out.mkdir(parents=True, exist_ok=True)
        for name, text in self.artifacts.items():
            target = self.out / name
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(text, encoding="utf-8")
        (self.out / "manifest.json").write_text(io.dump_json(manifest), encoding="utf-8")


# -------------------------------------------------------------------- ingest


def cmd_ingest(args) -> int:
    run = Run(args, "ingest")
    run.config.update(kind=args.kind, threshold=args.threshold, quantile=args.quantile)
    for p in args.inputs:
        run.add_input(p)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if args.kind == "cooccur":
            if args.universe:
                run.add_input(args.universe)
            graphs = [(Path(p).stem, ingest.cooccurrence_graph(io.read_corpus(p, args.universe))) for p in args.inputs]
        else:
            tables = [io.read_abundance_csv(p) for p in args.inputs]
            if args.kind == "kendall":
                threshold = 0.5 if args.threshold is None else args.threshold
                graphs = [(Path(p).stem, ingest.kendall_tau_graph(t, threshold)) for p, t in zip(args.inputs, tables)]
            else:
                threshold = args.threshold
                if threshold is None:
                    mats = [ingest.pearson_matrix(t.values) for t in tables]
                    threshold = ingest.pearson_quantile_threshold([np.nan_to_num(m) for m in mats], args.quantile)
                graphs = [(Path(p).stem, ingest.pearson_threshold_graph(t, threshold)) for p, t in zip(args.inputs, tables)]
            run.config["threshold"] = threshold
    names = [n for n, _ in graphs]
    if len(set(names)) != len(names):
        raise InvalidParams("input files must have distinct stems")
    for name, g in graphs:
        run.add(f"{name}.tsv", io.write_edge_list(g))
    run.commit({"warnings": [str(w.message) for w in caught]})
    return EXIT_OK


# ---------------------------------------------------------------------- dist

_METRIC_FLAGS = {
    "tau": "tau",
    "sigma": "sigma",
    "gamma": "gamma",
    "xi": "xi",
    "K": "K",
    "alpha": "alpha",
    "p": "p",
    "representation": "representation",
    "method": "method",
    "order": "order",
    "lengths": "lengths",
    "generalized": "generalized",
}


def metric_params(args) -> dict:
    metric = get_metric(args.metric)
    params = {}
    for flag, name in _METRIC_FLAGS.items():
        value = getattr(args, flag, None)
        if value is None or value is False:
            continue
        if name not in metric.params:
            raise InvalidParams(f"metric {metric.name!r} does not take --{flag}")
        params[name] = tuple(value) if isinstance(value, list) else value
    return params


def _json_params(params):
    return {k: list(v) if isinstance(v, tuple) else v for k, v in sorted(params.items())}


def _graph_ids(paths):
    # file stems, qualified by the parent directory when stems collide (series t0.tsv, t1.tsv, ...)
    ids = [Path(p).stem for p in paths]
    if len(set(ids)) != len(ids):
        ids = [f"{Path(p).parent.name}/{Path(p).stem}" for p in paths]
    if len(set(ids)) != len(ids):
        raise InvalidParams("graph files must have distinct stems or distinct parent directories")
    return ids


def cmd_dist(args) -> int:
    run = Run(args, "dist")
    get_metric(args.metric)
    params = metric_params(args)
    if len(args.graphs) < 2:
        raise InvalidParams("need at least 2 graph files")
    graphs = []
    for p in args.graphs:
        run.add_input(p)
        graphs.append(io.read_graph(p))
    for k, g in enumerate(graphs[1:], start=1):
        if g.node_ids != graphs[0].node_ids:
            raise NotAligned(f"{args.graphs[0]} and {args.graphs[k]} have different node ids")
    ids = _graph_ids(args.graphs)
    values, failures = analysis.pairwise_values(graphs, args.metric, params, args.threads, on_error="null")
    run.config.update(metric=args.metric, params=_json_params(params))
    if args.format in (None, "csv"):
        run.add("distances.csv", io.matrix_csv(ids, values))
    if args.format in (None, "json"):
        run.add("distances.json", io.matrix_json(ids, values, args.metric, _json_params(params), failures))
    run.commit({"failures": [{"i": ids[i], "j": ids[j], "reason": r} for (i, j), r in sorted(failures.items())]})
    return EXIT_OK


# ------------------------------------------------------------------- analyze


def _aligned_labels(d, path):
    labels = io.read_labels(path)
    if set(labels) != set(d.graph_ids):
        missing = sorted(set(d.graph_ids) - set(labels))
        extra = sorted(set(labels) - set(d.graph_ids))
        raise LabelMismatch(f"labels do not match matrix ids (missing {missing}, extra {extra})")
    return [labels[g] for g in d.graph_ids]


def _continuous(values, path):
    try:
        return np.array([float(v) for v in values])
    except ValueError:
        raise ParseError("continuous labels must be numbers", str(path)) from None


def _edges_csv(d, edges):
    return io.table_csv(["source", "target"], [(d.graph_ids[i], d.graph_ids[j]) for i, j in edges])


def _metagraph(d, args):
    if args.metagraph == "mst":
        return analysis.mst_metagraph(d)
    return analysis.knn_metagraph(d, args.k)


def cmd_analyze(args) -> int:
    run = Run(args, "analyze")
    run.add_input(args.matrix)
    d = io.read_distance_matrix(args.matrix)
    labels = None
    if args.labels:
        run.add_input(args.labels)
        labels = _aligned_labels(d, args.labels)
    run.config.update(subtask=args.subtask)
    task = args.subtask
    if task in ("fr", "anova") and labels is None:
        raise InvalidParams(f"{task} needs --labels")
    seed = args.seed

    if task == "knn":
        run.config.update(k=args.k)
        run.add("metagraph_knn.csv", _edges_csv(d, analysis.knn_metagraph(d, args.k)))
    elif task == "mst":
        run.add("metagraph_mst.csv", _edges_csv(d, analysis.mst_metagraph(d)))
    elif task == "fr":
        run.config.update(k=args.k, metagraph=args.metagraph, perms=args.perms, continuous=args.continuous)
        edges = _metagraph(d, args)
        if args.continuous:
            report = analysis.fr_test_continuous(edges, _continuous(labels, args.labels), args.perms, seed, args.threads)
        else:
            report = analysis.fr_test_discrete(edges, labels, args.perms, seed, args.threads)
        run.add("fr.json", report.to_json() + "\n")
    elif task == "anova":
        run.config.update(perms=args.perms, two_class=args.two_class)
        test = analysis.anova_ratio_two_class if args.two_class else analysis.anova_ratio_multiclass
        report = test(d, labels, args.perms, seed, args.threads)
        run.add("anova.json", report.to_json() + "\n")
    elif task == "mds":
        run.config.update(dims=args.dims)
        res = analysis.classical_mds_full(d, args.dims)
        run.add("mds.csv", io.coordinates_csv(d.graph_ids, res.coordinates))
        run.add(
            "mds_eigenvalues.json",
            io.dump_json({"eigenvalues": [float(x) for x in res.eigenvalues], "clamped_mass": res.clamped_mass}),
        )
    elif task == "cluster":
        run.config.update(k=args.k, linkage=args.linkage)
        pred = analysis.agglomerative_cluster(d, args.k, args.linkage)
        run.add("clusters.csv", io.table_csv(["graph_id", "cluster"], zip(d.graph_ids, pred)))
        if labels is not None:
            h, c = analysis.homogeneity_completeness(pred, labels)
            run.add("cluster_scores.json", io.dump_json({"homogeneity": h, "completeness": c}))
    elif task == "ordering":
        res = analysis.ordering_consistency(d)
        run.add("ordering.json", io.dump_json({"fraction": res.fraction, "ties": res.ties}))
    run.commit()
    return EXIT_OK


# --------------------------------------------------------------------- synth


def _initial_graph(args):
    if args.topology == "er":
        return synth.gen_er(args.n, args.p, args.seed)
    if args.topology == "pa":
        return synth.gen_pa(args.n, args.m, args.seed)
    if args.n is not None and args.n != 81:
        k = args.n // 3
        sizes = (k, k, args.n - 2 * k)
    else:
        sizes = synth.DEFAULT_SBM_SIZES
    return synth.gen_sbm(sizes, synth.DEFAULT_SBM_C, args.seed)


def cmd_synth(args) -> int:
    run = Run(args, "synth")
    if args.n is not None and args.n < 3:
        raise InvalidParams("n must be at least 3")
    if args.topology != "sbm" and args.n is None:
        args.n = 81
    if args.change_point:
        spec = synth.ChangePointSpec(
            synth.Regime(args.eta, args.p_delete, args.p_add),
            synth.Regime(args.burst_eta, args.burst_p_delete, args.burst_p_add),
            args.t_start,
            args.t_end,
            args.steps,
            args.seed,
        )
    else:
        spec = synth.DynamicsSpec(args.eta, args.p_delete, args.p_add, args.steps, args.seed)
    g0 = _initial_graph(args)
    series = synth.change_point_series(g0, spec) if args.change_point else synth.run_series(g0, spec)
    run.config.update(topology=args.topology, n=g0.n, p=args.p, m=args.m, change_point=args.change_point)
    for name, text in io.series_files(series.graphs).items():
        run.add(name, text)
    extra = {"params": series.params, "seed": args.seed}
    if series.blocks is not None:
        extra["blocks"] = [list(b) for b in series.blocks]
    run.commit(extra)
    return EXIT_OK


# -------------------------------------------------------------------- report


def cmd_report(args) -> int:
    run = Run(args, "report")
    if not args.series and not args.matrix:
        raise InvalidParams("give --series and/or --matrix")
    for name in args.metrics:
        get_metric(name)
    matrices = []
    for p in args.matrix:
        run.add_input(p)
        matrices.append((Path(p).stem, io.read_distance_matrix(p)))
    series = []
    for directory in args.series:
        graphs, manifest = io.read_series(directory)
        for k in range(len(graphs)):
            run.add_input(Path(directory) / f"t{k}.tsv")
        series.append((Path(directory).name, graphs, manifest))
    run.config.update(metrics=list(args.metrics))

    for stem, d in matrices:
        run.add(f"heatmap_{stem}.csv", io.matrix_csv(d.graph_ids, d.values))
        if args.blocks:
            r1, r2 = synth.regime_ratios(d, _parse_blocks(args.blocks))
            run.add(f"ratios_{stem}.csv", io.table_csv(["metric", "r1", "r2"], [(d.metric or stem, r1, r2)]))

    curve_rows, ratio_rows = [], []
    for name, graphs, manifest in series:
        blocks = manifest.get("blocks")
        if args.blocks:
            blocks = _parse_blocks(args.blocks)
        for metric in args.metrics:
            values, failures = analysis.pairwise_values(graphs, metric, {}, args.threads, on_error="null")
            ids = [f"t{k}" for k in range(len(graphs))]
            run.add(f"heatmap_{name}_{metric}.csv", io.matrix_csv(ids, values))
            for t in range(len(graphs) - 1):
                curve_rows.append((name, metric, t, values[t, t + 1]))
            if blocks:
                if failures:
                    r1 = r2 = float("nan")
                else:
                    r1, r2 = synth.regime_ratios(values, blocks)
                ratio_rows.append((name, metric, r1, r2))
    if series:
        run.add("curves.csv", io.table_csv(["series", "metric", "t", "distance"], curve_rows))
        if ratio_rows:
            run.add("ratios.csv", io.table_csv(["series", "metric", "r1", "r2"], ratio_rows))
    run.commit()
    return EXIT_OK


def _parse_blocks(text):
    try:
        blocks = [tuple(int(x) for x in part.split(":")) for part in text.split(",")]
    except ValueError:
        raise InvalidParams("blocks look like 0:6,6:13,13:21") from None
    if len(blocks) != 3 or any(len(b) != 2 for b in blocks):
        raise InvalidParams("blocks look like 0:6,6:13,13:21")
    return blocks


# -------------------------------------------------------------------- parser


def _float_list(text):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _global_flags(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=default(0), help="master seed (unsigned 64-bit)")
    parser.add_argument("--out", default=default("out"), help="output directory")
    parser.add_argument("--threads", type=int, default=default(1), help="worker threads")
    parser.add_argument("--format", choices=["csv", "json"], default=default(None), help="matrix output format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphdist", description="Compare aligned graphs and analyse graph datasets.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="build graphs from tables or corpora")
    p.add_argument("kind", choices=["kendall", "pearson", "cooccur"])
    p.add_argument("inputs", nargs="+")
    p.add_argument("--threshold", type=float)
    p.add_argument("--quantile", type=float, default=0.97, help="pearson: quantile used when --threshold is absent")
    p.add_argument("--universe", help="cooccur: file listing the item universe")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("dist", parents=[common], help="pairwise distance matrix")
    p.add_argument("metric", help=f"one of {', '.join(sorted(REGISTRY))}")
    p.add_argument("graphs", nargs="+")
    p.add_argument("--tau", type=_float_list, help="heat: diffusion scale(s), comma-separated")
    p.add_argument("--sigma", type=float, help="gaussian_density: kernel width")
    p.add_argument("--gamma", type=float, help="im/him: Lorentzian width (default: calibrated)")
    p.add_argument("--xi", type=float, help="him: weight of the Hamming term")
    p.add_argument("--K", type=int, help="polynomial: highest power")
    p.add_argument("--alpha", type=float, help="polynomial decay or lp_spectral low-pass strength")
    p.add_argument("--p", type=float, help="lp_spectral/centrality: norm order")
    p.add_argument("--representation", choices=["adjacency", "laplacian", "normalized_laplacian"])
    p.add_argument("--method", help="heat: exact|chebyshev; im/him: quad|closed")
    p.add_argument("--order", type=int, help="heat: Chebyshev order")
    p.add_argument("--lengths", choices=["auto", "unit", "inverse"], help="centrality: edge lengths")
    p.add_argument("--generalized", action="store_true", help="st: allow disconnected graphs")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("analyze", parents=[common], help="tests, embeddings and clustering on a matrix")
    p.add_argument("subtask", choices=["knn", "mst", "fr", "anova", "mds", "cluster", "ordering"])
    p.add_argument("matrix")
    p.add_argument("--labels")
    p.add_argument("--k", type=int, default=1, help="knn/fr: neighbours; cluster: number of clusters")
    p.add_argument("--metagraph", choices=["knn", "mst"], default="knn")
    p.add_argument("--perms", type=int, default=analysis.DEFAULT_PERMUTATIONS)
    p.add_argument("--continuous", action="store_true", help="fr: labels are real-valued")
    p.add_argument("--two-class", action="store_true", help="anova: two-class form")
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--linkage", choices=["average", "single", "complete"], default="average")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", parents=[common], help="synthetic graph series")
    p.add_argument("topology", choices=["er", "pa", "sbm"])
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float, default=0.1, help="er: edge probability")
    p.add_argument("--m", type=int, default=2, help="pa: edges per new node")
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--eta", type=float, default=synth.CALM.rewire_fraction)
    p.add_argument("--p-delete", type=float, default=synth.CALM.p_delete)
    p.add_argument("--p-add", type=float, default=synth.CALM.p_add)
    p.add_argument("--change-point", action="store_true")
    p.add_argument("--burst-eta", type=float, default=synth.BURST.rewire_fraction)
    p.add_argument("--burst-p-delete", type=float, default=synth.BURST.p_delete)
    p.add_argument("--burst-p-add", type=float, default=synth.BURST.p_add)
    p.add_argument("--t-start", type=int, default=6)
    p.add_argument("--t-end", type=int, default=13)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("report", parents=[common], help="plot-ready tables from series or matrices")
    p.add_argument("--series", nargs="*", default=[])
    p.add_argument("--matrix", nargs="*", default=[])
    p.add_argument("--metrics", nargs="*", default=["hamming"])
    p.add_argument("--blocks", help="three index ranges, e.g. 0:6,6:13,13:21")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if not 0 <= args.seed < 2**64:
            raise InvalidParams("seed must be an unsigned 64-bit integer")
        if args.threads < 1:
            raise InvalidParams("threads must be at least 1")
        return args.func(args)
    except ParseError as exc:
        code, msg = EXIT_PARSE, exc
    except UnknownMetric as exc:
        code, msg = EXIT_METRIC, exc.args[0]
    except NotAligned as exc:
        code, msg = EXIT_ALIGN, exc
    except LabelMismatch as exc:
        code, msg = EXIT_LABELS, exc
    except PairError as exc:
        code, msg = EXIT_PARAMS, exc
    except (InvalidParams, ValueError) as exc:
        code, msg = EXIT_PARAMS, exc
    except FileNotFoundError as exc:
        code, msg = EXIT_PARSE, f"{exc.filename}: file not found"
    print(f"graphdist: error: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
