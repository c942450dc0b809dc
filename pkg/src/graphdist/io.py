"""Text file formats.

Readers raise :class:`ParseError` with 1-based line and column. Writers
return strings so callers decide when (and whether) anything touches disk;
reals are written with 17 significant digits, which round-trips exactly.

Formats
-------
edge list (``.tsv``)
    ``#nodes<TAB>id1,id2,...`` header fixing node order, then one
    ``u<TAB>v[<TAB>w]`` line per edge (weight defaults to 1).
adjacency (``.csv``)
    first row node ids, then one row per matrix row.
abundance table (``.csv``)
    header ``sample,feature1,...``; one row per sample.
corpus
    one document per line, items separated by tabs or commas. An optional
    universe file lists one item per line.
labels (``.csv``)
    header ``graph_id,label``.
distance matrix
    CSV with header ``graph_id,id1,...`` (``null`` marks a failed pair) or a
    JSON envelope ``{graph_ids, metric, params, matrix, failures}``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from pathlib import Path

import numpy as np

from .analysis import DistanceMatrix
from .errors import InvalidGraph, ParseError
from .graph import AlignedGraph, from_edge_list
from .ingest import AbundanceTable, ItemSetCorpus

NULL = "null"


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return NULL
    return format(x, ".17g")


def _parse_float(text, path, line, col):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", path, line, col) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value: {text!r}", path, line, col)
    return value


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8 text ({exc.reason})", str(path)) from None


# ---------------------------------------------------------------- edge lists


def write_edge_list(g: AlignedGraph) -> str:
    lines = ["#nodes\t" + ",".join(g.node_ids)]
    for i, j, w in g.edges():
        lines.append(f"{g.node_ids[i]}\t{g.node_ids[j]}\t{fmt(w)}")
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str, path: str = "<string>") -> AlignedGraph:
    node_ids = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        fields = raw.split("\t")
        if node_ids is None:
            if fields[0] != "#nodes" or len(fields) != 2:
                raise ParseError("expected '#nodes<TAB>id1,id2,...' header", path, lineno, 1)
            node_ids = fields[1].split(",")
            if any(not f for f in node_ids):
                raise ParseError("empty node id in header", path, lineno)
            if len(set(node_ids)) != len(node_ids):
                raise ParseError("duplicate node id in header", path, lineno)
            known, seen = set(node_ids), set()
            continue
        if raw.startswith("#"):
            continue
        if len(fields) not in (2, 3):
            raise ParseError(f"expected 2 or 3 tab-separated fields, got {len(fields)}", path, lineno, 1)
        w = _parse_float(fields[2], path, lineno, 3) if len(fields) == 3 else 1.0
        for col, v in ((1, fields[0]), (2, fields[1])):
            if v not in known:
                raise ParseError(f"unknown node {v!r}", path, lineno, col)
        if fields[0] == fields[1]:
            raise ParseError(f"self loop on {fields[0]!r}", path, lineno, 1)
        if not w > 0:
            raise ParseError(f"edge weight must be positive, got {w}", path, lineno, 3)
        pair = frozenset(fields[:2])
        if pair in seen:
            raise ParseError(f"duplicate edge ({fields[0]!r}, {fields[1]!r})", path, lineno, 1)
        seen.add(pair)
        edges.append((fields[0], fields[1], w))
    if node_ids is None:
        raise ParseError("missing '#nodes' header", path, 1, 1)
    try:
        return from_edge_list(node_ids, edges)
    except InvalidGraph as exc:
        raise ParseError(str(exc), path) from None


def read_edge_list(path) -> AlignedGraph:
    return parse_edge_list(_read_text(path), str(path))


def write_adjacency_csv(g: AlignedGraph) -> str:
    lines = [",".join(g.node_ids)]
    lines.extend(",".join(fmt(x) for x in row) for row in g.weights)
    return "\n".join(lines) + "\n"


def parse_adjacency_csv(text: str, path: str = "<string>") -> AlignedGraph:
    rows = [(k, r) for k, r in enumerate(_csv_rows(text), start=1) if r]
    if not rows:
        raise ParseError("empty file", path, 1, 1)
    ids = rows[0][1]
    n = len(ids)
    if len(rows) - 1 != n:
        raise ParseError(f"expected {n} matrix rows, got {len(rows) - 1}", path)
    values = []
    for lineno, row in rows[1:]:
        if len(row) != n:
            raise ParseError(f"expected {n} fields, got {len(row)}", path, lineno, 1)
        values.append([_parse_float(c, path, lineno, k + 1) for k, c in enumerate(row)])
    try:
        return AlignedGraph(ids, np.array(values))
    except ValueError as exc:
        raise ParseError(str(exc), path) from None


def read_adjacency_csv(path) -> AlignedGraph:
    return parse_adjacency_csv(_read_text(path), str(path))


def read_graph(path) -> AlignedGraph:
    """Edge list for ``.tsv`` files, adjacency CSV otherwise."""
    if str(path).endswith(".csv"):
        return read_adjacency_csv(path)
    return read_edge_list(path)


# ------------------------------------------------------------------- tables


def _csv_rows(text):
    return list(csv.reader(io.StringIO(text)))


def parse_abundance_csv(text: str, path: str = "<string>") -> AbundanceTable:
    rows = [(k, r) for k, r in enumerate(_csv_rows(text), start=1) if any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty file", path, 1, 1)
    _, header = rows[0]
    if len(header) < 2:
        raise ParseError("header needs a sample column and at least one feature", path, rows[0][0], 1)
    cols = header[1:]
    sample_ids, values = [], []
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", path, lineno, min(len(row), len(header)) + 1)
        sample_ids.append(row[0])
        values.append([_parse_float(c, path, lineno, k + 2) for k, c in enumerate(row[1:])])
    if not values:
        raise ParseError("no data rows", path, rows[0][0] + 1, 1)
    v = np.array(values)
    if np.any(v < 0):
        r, c = np.argwhere(v < 0)[0]
        raise ParseError("abundances must be non-negative", path, rows[r + 1][0], c + 2)
    try:
        return AbundanceTable(tuple(sample_ids), tuple(cols), v)
    except ValueError as exc:
        raise ParseError(str(exc), path) from None


def read_abundance_csv(path) -> AbundanceTable:
    return parse_abundance_csv(_read_text(path), str(path))


_ITEM_SPLIT = re.compile(r"[\t,]")


def parse_corpus(text: str, universe_text: str | None = None, path: str = "<string>", universe_path: str = "<string>"):
    docs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        items = [s.strip() for s in _ITEM_SPLIT.split(raw)]
        docs.append((lineno, [s for s in items if s]))
    if universe_text is None:
        universe = sorted({item for _, items in docs for item in items})
    else:
        universe = [s.strip() for s in universe_text.splitlines() if s.strip()]
        if len(set(universe)) != len(universe):
            raise ParseError("duplicate item in universe", universe_path)
        known = set(universe)
        for lineno, items in docs:
            for item in items:
                if item not in known:
                    col = text.splitlines()[lineno - 1].find(item) + 1
                    raise ParseError(f"item {item!r} not in universe", path, lineno, col)
    return ItemSetCorpus(tuple(universe), tuple(items for _, items in docs))


def read_corpus(path, universe_path=None) -> ItemSetCorpus:
    universe = None if universe_path is None else _read_text(universe_path)
    return parse_corpus(_read_text(path), universe, str(path), str(universe_path))


def parse_labels(text: str, path: str = "<string>") -> dict:
    rows = [(k, r) for k, r in enumerate(_csv_rows(text), start=1) if any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty label file", path, 1, 1)
    out = {}
    for lineno, row in rows[1:]:
        if len(row) != 2:
            raise ParseError(f"expected 2 fields, got {len(row)}", path, lineno, 1)
        if row[0] in out:
            raise ParseError(f"duplicate graph id {row[0]!r}", path, lineno, 1)
        out[row[0]] = row[1]
    return out


def read_labels(path) -> dict:
    return parse_labels(_read_text(path), str(path))


# ----------------------------------------------------------- distance output


def matrix_csv(graph_ids, values) -> str:
    lines = [",".join(["graph_id", *graph_ids])]
    for gid, row in zip(graph_ids, values):
        lines.append(",".join([gid, *(fmt(x) for x in row)]))
    return "\n".join(lines) + "\n"


def matrix_json(graph_ids, values, metric, params, failures=None) -> str:
    matrix = [[None if math.isnan(x) else float(x) for x in row] for row in np.asarray(values, dtype=float)]
    doc = {
        "graph_ids": list(graph_ids),
        "metric": metric,
        "params": params,
        "matrix": matrix,
        "failures": [
            {"i": graph_ids[i], "j": graph_ids[j], "reason": reason} for (i, j), reason in sorted((failures or {}).items())
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_distance_matrix(d: DistanceMatrix, kind: str = "csv") -> str:
    if kind == "json":
        return matrix_json(d.graph_ids, d.values, d.metric, d.params)
    return matrix_csv(d.graph_ids, d.values)


def parse_distance_matrix(text: str, path: str = "<string>") -> DistanceMatrix:
    """Read either the CSV or the JSON matrix format (sniffed by first character)."""
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
            ids, matrix = doc["graph_ids"], doc["matrix"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ParseError(f"bad JSON matrix: {exc}", path) from None
        if any(x is None for row in matrix for x in row):
            raise ParseError("matrix contains null entries", path)
        try:
            return DistanceMatrix(tuple(ids), np.array(matrix, dtype=float), doc.get("metric", ""), doc.get("params", {}))
        except ValueError as exc:
            raise ParseError(str(exc), path) from None
    rows = [(k, r) for k, r in enumerate(_csv_rows(text), start=1) if r]
    if not rows:
        raise ParseError("empty file", path, 1, 1)
    header = rows[0][1]
    if header[0] != "graph_id":
        raise ParseError("expected 'graph_id' as first header field", path, 1, 1)
    ids = header[1:]
    if len(rows) - 1 != len(ids):
        raise ParseError(f"expected {len(ids)} rows, got {len(rows) - 1}", path)
    values = []
    for (lineno, row), gid in zip(rows[1:], ids):
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", path, lineno, 1)
        if row[0] != gid:
            raise ParseError(f"row id {row[0]!r} does not match column id {gid!r}", path, lineno, 1)
        for k, c in enumerate(row[1:]):
            if c == NULL:
                raise ParseError("matrix contains null entries", path, lineno, k + 2)
        values.append([_parse_float(c, path, lineno, k + 2) for k, c in enumerate(row[1:])])
    try:
        return DistanceMatrix(tuple(ids), np.array(values))
    except ValueError as exc:
        raise ParseError(str(exc), path) from None


def read_distance_matrix(path) -> DistanceMatrix:
    return parse_distance_matrix(_read_text(path), str(path))


def coordinates_csv(graph_ids, coords) -> str:
    dims = coords.shape[1]
    lines = [",".join(["graph_id", *(f"x{k + 1}" for k in range(dims))])]
    for gid, row in zip(graph_ids, coords):
        lines.append(",".join([gid, *(fmt(x) for x in row)]))
    return "\n".join(lines) + "\n"


def signature_csv(sig) -> str:
    """Heat signature: node id, then one column per (scale, landing node)."""
    header = ["node_id"] + [f"tau={fmt(t)}:{v}" for t in sig.scales for v in sig.node_ids]
    rows = [[nid, *(fmt(x) for x in row)] for nid, row in zip(sig.node_ids, sig.coefficients)]
    return "\n".join(",".join(r) for r in [header, *rows]) + "\n"


def drift_csv(pairs) -> str:
    """``(node_id, drift)`` pairs, already sorted by the caller."""
    return table_csv(["node_id", "drift"], [(nid, float(d)) for nid, d in pairs])


def table_csv(header, rows) -> str:
    def cell(x):
        if isinstance(x, (float, np.floating)):
            return fmt(x)
        return str(x)

    lines = [",".join(header)]
    lines.extend(",".join(cell(x) for x in row) for row in rows)
    return "\n".join(lines) + "\n"


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ------------------------------------------------------------------- series


def series_files(graphs) -> dict:
    """``{"t0.tsv": text, ...}`` for a graph series."""
    return {f"t{k}.tsv": write_edge_list(g) for k, g in enumerate(graphs)}


_SERIES_NAME = re.compile(r"^t(\d+)\.tsv$")


def read_series(directory) -> tuple[list, dict]:
    """Graphs ``t0.tsv, t1.tsv, ...`` in index order plus the manifest (if any)."""
    directory = Path(directory)
    found = []
    for p in directory.iterdir():
        m = _SERIES_NAME.match(p.name)
        if m:
            found.append((int(m.group(1)), p))
    found.sort()
    if [k for k, _ in found] != list(range(len(found))) or not found:
        raise ParseError("series files must be t0.tsv .. t{n}.tsv without gaps", str(directory))
    graphs = [read_edge_list(p) for _, p in found]
    manifest = {}
    mpath = directory / "manifest.json"
    if mpath.exists():
        try:
            manifest = json.loads(_read_text(mpath))
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad manifest: {exc.msg}", str(mpath), exc.lineno, exc.colno) from None
    return graphs, manifest
