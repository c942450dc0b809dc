import hashlib
import json
import math
import shutil
import subprocess
import sys

import numpy as np
import pytest

from graphdist import io
from graphdist.analysis import DistanceMatrix, classical_mds, fr_test_discrete, knn_metagraph
from graphdist.cli import main
from graphdist.errors import ParseError
from graphdist.graph import AlignedGraph, complete_graph, from_adjacency, from_edge_list
from graphdist.mesoscale import heat_distance
from oracles import random_binary, random_weighted

K3 = complete_graph(3)
P3 = from_edge_list(K3.node_ids, [("v0", "v1"), ("v1", "v2")])
SPLIT = from_edge_list(K3.node_ids, [("v0", "v1")])


def write_graph(path, g):
    path.write_text(io.write_edge_list(g))
    return str(path)


def tree_digest(root):
    return {str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(root.rglob("*")) if p.is_file()}


# -- formats ----------------------------------------------------------------------


def test_edge_list_round_trip():
    rng = np.random.default_rng(0)
    for _ in range(20):
        g = from_adjacency(random_weighted(9, 0.4, rng))
        assert io.parse_edge_list(io.write_edge_list(g)) == g


def test_adjacency_csv_round_trip():
    g = from_adjacency(random_weighted(6, 0.5, np.random.default_rng(1)))
    assert io.parse_adjacency_csv(io.write_adjacency_csv(g)) == g


@pytest.mark.parametrize(
    "body,line,column",
    [
        ("a\tz\n", 2, 2),
        ("a\ta\n", 2, 1),
        ("a\tb\t-1\n", 2, 3),
        ("a\tb\tx\n", 2, 3),
        ("a\tb\nb\ta\n", 3, 1),
        ("a\tb\tc\td\n", 2, 1),
    ],
)
def test_edge_list_errors_report_position(body, line, column):
    with pytest.raises(ParseError) as info:
        io.parse_edge_list("#nodes\ta,b,c\n" + body, "g.tsv")
    assert (info.value.line, info.value.column) == (line, column)
    assert info.value.path == "g.tsv"


def test_edge_list_missing_header():
    with pytest.raises(ParseError):
        io.parse_edge_list("a\tb\n")


def test_distance_matrix_formats():
    d = DistanceMatrix(("a", "b", "c"), [[0, 0.1, 1 / 3], [0.1, 0, 2], [1 / 3, 2, 0]], "hamming", {"x": 1})
    for kind in ("csv", "json"):
        back = io.parse_distance_matrix(io.write_distance_matrix(d, kind))
        assert np.array_equal(back.values, d.values)
        assert back.graph_ids == d.graph_ids
    assert io.parse_distance_matrix(io.write_distance_matrix(d, "json")) == d


def test_fmt_round_trips_exactly():
    rng = np.random.default_rng(2)
    for x in rng.random(1000) * 10.0 ** rng.integers(-12, 12, 1000):
        assert float(io.fmt(x)) == x
    assert io.fmt(float("nan")) == "null"


def test_labels_and_corpus():
    assert io.parse_labels("graph_id,label\ng0,a\ng1,b\n") == {"g0": "a", "g1": "b"}
    with pytest.raises(ParseError):
        io.parse_labels("graph_id,label\ng0,a\ng0,b\n")
    corpus = io.parse_corpus("x,y\n\ny\tz\n")
    assert corpus.universe == ("x", "y", "z")


# -- dist ----------------------------------------------------------------------------


def test_dist_hamming(tmp_path):
    a, b = write_graph(tmp_path / "a.tsv", K3), write_graph(tmp_path / "b.tsv", P3)
    out = tmp_path / "out"
    assert main(["dist", "hamming", a, b, "--out", str(out)]) == 0
    d = io.read_distance_matrix(out / "distances.csv")
    assert d.values[0, 1] == pytest.approx(1 / 3)
    doc = json.loads((out / "distances.json").read_text())
    assert doc["metric"] == "hamming" and doc["failures"] == []
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["artifacts"]) == {"distances.csv", "distances.json"}
    assert set(manifest["inputs"]) == {a, b}


def test_dist_heat_matches_library(tmp_path):
    rng = np.random.default_rng(3)
    graphs = [from_adjacency(random_binary(12, 0.3, rng)) for _ in range(4)]
    paths = [write_graph(tmp_path / f"g{k}.tsv", g) for k, g in enumerate(graphs)]
    out = tmp_path / "out"
    assert main(["dist", "heat", *paths, "--tau", "1.2", "--out", str(out), "--format", "json"]) == 0
    doc = json.loads((out / "distances.json").read_text())
    for i in range(4):
        for j in range(4):
            expected = 0.0 if i == j else heat_distance(graphs[min(i, j)], graphs[max(i, j)], scales=(1.2,))
            assert doc["matrix"][i][j] == expected
    assert doc["params"] == {"tau": [1.2]}
    assert not (out / "distances.csv").exists()


def test_dist_st_disconnected_is_null(tmp_path):
    paths = [write_graph(tmp_path / f"{n}.tsv", g) for n, g in (("k3", K3), ("p3", P3), ("split", SPLIT))]
    out = tmp_path / "out"
    assert main(["dist", "st", *paths, "--out", str(out)]) == 0
    doc = json.loads((out / "distances.json").read_text())
    assert doc["matrix"][0][2] is None and doc["matrix"][2][1] is None
    assert doc["matrix"][0][1] == pytest.approx(math.log(3))
    assert {"i": "k3", "j": "split", "reason": "disconnected"} in doc["failures"]
    assert "null" in (out / "distances.csv").read_text()


def test_dist_exit_codes(tmp_path):
    a, b = write_graph(tmp_path / "a.tsv", K3), write_graph(tmp_path / "b.tsv", P3)
    c = write_graph(tmp_path / "c.tsv", complete_graph(4))
    out = tmp_path / "out"
    assert main(["dist", "nope", a, b, "--out", str(out)]) == 3
    assert main(["dist", "hamming", a, c, "--out", str(out)]) == 4
    assert main(["dist", "hamming", a, b, "--tau", "1", "--out", str(out)]) == 6
    assert main(["dist", "hamming", a, str(tmp_path / "missing.tsv"), "--out", str(out)]) == 2
    assert not out.exists()


def test_dist_ids_from_series_directories(tmp_path):
    for name in ("x", "y"):
        (tmp_path / name).mkdir()
        write_graph(tmp_path / name / "t0.tsv", K3)
    out = tmp_path / "out"
    assert main(["dist", "hamming", str(tmp_path / "x" / "t0.tsv"), str(tmp_path / "y" / "t0.tsv"), "--out", str(out)]) == 0
    assert io.read_distance_matrix(out / "distances.csv").graph_ids == ("x/t0", "y/t0")
    dup = str(tmp_path / "x" / "t0.tsv")
    assert main(["dist", "hamming", dup, dup, "--out", str(tmp_path / "o2")]) == 6


def test_dist_parse_error_writes_nothing(tmp_path, capsys):
    a = write_graph(tmp_path / "a.tsv", K3)
    bad = tmp_path / "bad.tsv"
    bad.write_text("#nodes\tv0,v1,v2\nv0\tv9\n")
    out = tmp_path / "out"
    assert main(["dist", "hamming", a, str(bad), "--out", str(out)]) == 2
    assert not out.exists()
    err = capsys.readouterr().err
    assert "bad.tsv:2:2:" in err and "unknown node" in err


def test_console_script_exit_code(tmp_path):
    a = write_graph(tmp_path / "a.tsv", K3)
    proc = subprocess.run(
        [sys.executable, "-m", "graphdist.cli", "dist", "bogus", a, a, "--out", str(tmp_path / "o")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 3


# -- ingest --------------------------------------------------------------------------


def test_ingest_kendall_and_cooccur(tmp_path):
    table = tmp_path / "site.csv"
    table.write_text("sample,a,b,c,d\ns1,1,2,5,0\ns2,2,3,4,1\ns3,3,5,3,0\ns4,4,6,2,2\ns5,5,8,1,1\n")
    out = tmp_path / "k"
    assert main(["ingest", "kendall", str(table), "--out", str(out)]) == 0
    g = io.read_edge_list(out / "site.tsv")
    assert g.node_ids == ("a", "b", "c", "d")
    assert g.weights[0, 1] > 0 and g.weights[0, 2] == 0

    corpus = tmp_path / "docs.txt"
    corpus.write_text("x,y\nx,y,z\ny,z\n")
    out = tmp_path / "c"
    assert main(["ingest", "cooccur", str(corpus), "--out", str(out)]) == 0
    g = io.read_edge_list(out / "docs.tsv")
    assert g.weights[0, 1] == 2 and g.weights[1, 2] == 2 and g.weights[0, 2] == 1


def test_ingest_malformed_csv(tmp_path):
    table = tmp_path / "bad.csv"
    table.write_text("sample,a,b\ns1,1,2\ns2,1\n")
    out = tmp_path / "out"
    assert main(["ingest", "kendall", str(table), "--out", str(out)]) == 2
    assert not out.exists()


# -- analyze --------------------------------------------------------------------------


def _matrix_file(tmp_path, values, ids=None):
    ids = ids or [f"g{k}" for k in range(len(values))]
    path = tmp_path / "m.csv"
    path.write_text(io.matrix_csv(ids, np.asarray(values, dtype=float)))
    return str(path), ids


def _labels_file(tmp_path, ids, labels, name="labels.csv"):
    path = tmp_path / name
    path.write_text("graph_id,label\n" + "".join(f"{i},{l}\n" for i, l in zip(ids, labels)))
    return str(path)


def test_analyze_fr_matches_library_and_reruns(tmp_path):
    rng = np.random.default_rng(4)
    x = rng.normal(size=(10, 2))
    v = np.linalg.norm(x[:, None] - x[None], axis=2)
    mpath, ids = _matrix_file(tmp_path, v)
    labels = ["a"] * 5 + ["b"] * 5
    lpath = _labels_file(tmp_path, ids, labels)
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        argv = ["analyze", "fr", mpath, "--labels", lpath, "--k", "1", "--perms", "5000", "--seed", "7", "--out", str(out)]
        assert main(argv) == 0
        outs.append(out)
    assert tree_digest(outs[0]) == tree_digest(outs[1])
    report = json.loads((outs[0] / "fr.json").read_text())
    d = io.read_distance_matrix(mpath)
    expected = fr_test_discrete(knn_metagraph(d, 1), labels, 5000, 7)
    assert report == expected.to_dict()
    assert report["seed"] == 7


def test_analyze_mds_line(tmp_path):
    mpath, _ = _matrix_file(tmp_path, [[0, 1, 3], [1, 0, 2], [3, 2, 0]])
    out = tmp_path / "o"
    assert main(["analyze", "mds", mpath, "--dims", "2", "--out", str(out)]) == 0
    rows = [line.split(",") for line in (out / "mds.csv").read_text().splitlines()]
    assert rows[0] == ["graph_id", "x1", "x2"]
    coords = np.array([[float(c) for c in r[1:]] for r in rows[1:]])
    np.testing.assert_array_equal(coords, classical_mds(io.read_distance_matrix(mpath), 2))


def test_analyze_other_subtasks(tmp_path):
    x = np.array([0.0, 1.0, 2.0, 10.0, 11.0, 12.0])
    v = np.abs(x[:, None] - x[None])
    mpath, ids = _matrix_file(tmp_path, v)
    lpath = _labels_file(tmp_path, ids, ["a", "a", "a", "b", "b", "b"])
    for task, extra, artifact in [
        ("knn", ["--k", "2"], "metagraph_knn.csv"),
        ("mst", [], "metagraph_mst.csv"),
        ("anova", ["--labels", lpath, "--perms", "500"], "anova.json"),
        ("cluster", ["--k", "2", "--labels", lpath], "cluster_scores.json"),
        ("ordering", [], "ordering.json"),
    ]:
        out = tmp_path / task
        assert main(["analyze", task, mpath, *extra, "--out", str(out)]) == 0
        assert (out / artifact).exists()
    scores = json.loads((tmp_path / "cluster" / "cluster_scores.json").read_text())
    assert scores == {"completeness": 1.0, "homogeneity": 1.0}
    assert (tmp_path / "mst" / "metagraph_mst.csv").read_text().splitlines()[1:] == [
        "g0,g1",
        "g1,g2",
        "g2,g3",
        "g3,g4",
        "g4,g5",
    ]


def test_analyze_label_mismatch(tmp_path):
    mpath, ids = _matrix_file(tmp_path, np.ones((3, 3)) - np.eye(3))
    lpath = _labels_file(tmp_path, ["g0", "g1", "zz"], ["a", "b", "a"])
    out = tmp_path / "o"
    assert main(["analyze", "fr", mpath, "--labels", lpath, "--out", str(out)]) == 5
    assert not out.exists()


# -- synth and report -----------------------------------------------------------------


def test_synth_change_point(tmp_path):
    out = tmp_path / "s"
    assert main(["synth", "sbm", "--change-point", "--seed", "3", "--out", str(out)]) == 0
    files = sorted(p.name for p in out.iterdir())
    assert len([f for f in files if f.endswith(".tsv")]) == 21 and "manifest.json" in files
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["blocks"] == [[0, 6], [6, 13], [13, 21]]
    assert manifest["seed"] == 3
    again = tmp_path / "s2"
    assert main(["synth", "sbm", "--change-point", "--seed", "3", "--out", str(again)]) == 0
    assert tree_digest(out) == tree_digest(again)
    graphs, _ = io.read_series(out)
    assert len(graphs) == 21 and all(isinstance(g, AlignedGraph) for g in graphs)


def test_synth_invalid_params(tmp_path):
    assert main(["synth", "er", "--eta", "2", "--out", str(tmp_path / "o")]) == 6
    assert main(["synth", "er", "--n", "1", "--out", str(tmp_path / "o")]) == 6
    assert not (tmp_path / "o").exists()


def test_report_identical_series_and_matrix(tmp_path):
    series = tmp_path / "flat"
    series.mkdir()
    for k in range(4):
        write_graph(series / f"t{k}.tsv", P3)
    mpath, _ = _matrix_file(tmp_path, [[0, 1, 3], [1, 0, 2], [3, 2, 0]])
    out = tmp_path / "r"
    assert main(["report", "--series", str(series), "--matrix", mpath, "--metrics", "hamming", "--out", str(out)]) == 0
    rows = (out / "curves.csv").read_text().splitlines()
    assert rows[0] == "series,metric,t,distance"
    assert all(r.endswith(",0") for r in rows[1:]) and len(rows) == 4
    assert (out / "heatmap_m.csv").read_text() == (tmp_path / "m.csv").read_text()


def test_report_change_point_ratios(tmp_path):
    series = tmp_path / "cp"
    assert main(["synth", "sbm", "--change-point", "--seed", "1", "--out", str(series)]) == 0
    out = tmp_path / "r"
    assert main(["report", "--series", str(series), "--metrics", "st", "polynomial", "--out", str(out)]) == 0
    rows = [r.split(",") for r in (out / "ratios.csv").read_text().splitlines()]
    assert rows[0] == ["series", "metric", "r1", "r2"]
    assert [r[1] for r in rows[1:]] == ["st", "polynomial"]
    assert float(rows[2][2]) > 1 and float(rows[2][3]) > 1
    assert main(["report", "--series", str(series), "--metrics", "nope", "--out", str(tmp_path / "x")]) == 3


def test_full_pipeline_byte_identical(tmp_path):
    def run(root):
        for topo in ("er", "sbm"):
            assert main(["synth", topo, "--steps", "4", "--seed", "5", "--out", str(root / topo)]) == 0
        names = [str(p) for topo in ("er", "sbm") for p in sorted((root / topo).glob("t*.tsv"))]
        assert main(["dist", "heat", *names, "--tau", "1.2", "--threads", "4", "--out", str(root / "d")]) == 0
        ids = io.read_distance_matrix(root / "d" / "distances.csv").graph_ids
        assert ids[0] == "er/t0"
        lpath = _labels_file(root, ids, [i.split("/")[0] for i in ids])
        argv = ["analyze", "anova", str(root / "d" / "distances.csv"), "--labels", lpath, "--perms", "999"]
        assert main(argv + ["--seed", "2", "--threads", "3", "--out", str(root / "a")]) == 0

    root = tmp_path / "run"
    root.mkdir()
    run(root)
    first = tree_digest(root)
    shutil.rmtree(root)
    root.mkdir()
    run(root)
    assert tree_digest(root) == first
