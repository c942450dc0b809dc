import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphdist.analysis import distance_matrix
from graphdist.errors import AsymmetricC, BlockTooSmall, InvalidParams
from graphdist.graph import complete_graph, empty_graph, from_adjacency
from graphdist.structural import hamming, jaccard_binary
from graphdist.synth import (
    BURST,
    CALM,
    DEFAULT_SBM_C,
    ChangePointSpec,
    DynamicsSpec,
    Regime,
    change_point_series,
    gen_er,
    gen_pa,
    gen_sbm,
    perturb_step,
    regime_ratios,
    run_series,
)
from oracles import random_binary


def n_edges(g):
    return int(np.count_nonzero(g.weights)) // 2


# -- generators -------------------------------------------------------------------


def test_er_extremes():
    assert gen_er(6, 0.0) == empty_graph(6)
    assert gen_er(6, 1.0) == complete_graph(6)
    assert gen_er(4, 0.5).node_ids == ("v0", "v1", "v2", "v3")


def test_er_mean_edge_count():
    counts = [n_edges(gen_er(81, 0.1, seed=s)) for s in range(500)]
    assert np.mean(counts) == pytest.approx(324, rel=0.03)


def test_pa_small_and_counts():
    g = gen_pa(3, 1, seed=4)
    assert n_edges(g) == 2
    assert np.linalg.matrix_rank(np.diag(np.asarray(g.weights).sum(1)) - g.weights) == 2
    for n, m in [(10, 1), (30, 2), (81, 2), (40, 5)]:
        assert n_edges(gen_pa(n, m, seed=n)) == m * (n - m)
    with pytest.raises(InvalidParams):
        gen_pa(2, 2)


def test_pa_heavier_tail_than_er():
    wins = 0
    for s in range(200):
        pa = gen_pa(81, 2, seed=s)
        er = gen_er(81, 2 * n_edges(pa) / (81 * 80), seed=10_000 + s)
        wins += np.asarray(pa.weights).sum(1).max() > np.asarray(er.weights).sum(1).max()
    assert wins >= 180


def test_sbm_extremes_and_errors():
    assert gen_sbm((3, 3), np.zeros((2, 2))) == empty_graph(6)
    assert gen_sbm((3, 3), np.ones((2, 2))) == complete_graph(6)
    with pytest.raises(AsymmetricC):
        gen_sbm((3, 3), [[0.1, 0.2], [0.3, 0.1]])
    with pytest.raises(InvalidParams):
        gen_sbm((3, 3), [[0.1, 2.0], [2.0, 0.1]])
    with pytest.raises(InvalidParams):
        gen_sbm((3, 3, 3), [[0.1, 0.2], [0.2, 0.1]])


def test_sbm_block_density():
    dens = []
    for s in range(500):
        a = np.asarray(gen_sbm(seed=s).weights)[:27, :27]
        dens.append(a.sum() / (27 * 26))
    assert np.mean(dens) == pytest.approx(DEFAULT_SBM_C[0][0], rel=0.05)


def test_generators_deterministic():
    assert gen_er(30, 0.2, seed=5) == gen_er(30, 0.2, seed=5)
    assert gen_pa(30, 2, seed=5) == gen_pa(30, 2, seed=5)
    assert gen_sbm(seed=5) == gen_sbm(seed=5)
    assert gen_er(30, 0.2, seed=5) != gen_er(30, 0.2, seed=6)


# -- dynamics ----------------------------------------------------------------------


def test_regime_validation():
    with pytest.raises(InvalidParams):
        Regime(rewire_fraction=1.5)
    with pytest.raises(InvalidParams):
        DynamicsSpec(steps=0)
    with pytest.raises(InvalidParams):
        ChangePointSpec(t_burst_start=13, t_burst_end=6)
    assert CALM == Regime(0.085, 0.015, 0.015)
    assert BURST == Regime(0.34, 0.06, 0.06)


def test_null_step_is_identity():
    g = gen_er(30, 0.2, seed=1)
    assert perturb_step(g, Regime(), 7) == g


def test_weighted_input_rejected():
    g = from_adjacency(np.array([[0, 2.0], [2.0, 0]]))
    with pytest.raises(InvalidParams):
        perturb_step(g, CALM, 0)


@given(st.integers(3, 20), st.floats(0.0, 1.0), st.integers(0, 2**32), st.sampled_from([CALM, BURST, Regime(1.0, 0, 0)]))
def test_step_preserves_graph_invariants(n, p, seed, regime):
    g = from_adjacency(random_binary(n, p, np.random.default_rng(seed)))
    h = perturb_step(g, regime, seed)
    w = np.asarray(h.weights)
    assert np.array_equal(w, w.T)
    assert np.all(np.diag(w) == 0)
    assert set(np.unique(w)) <= {0.0, 1.0}
    assert h.node_ids == g.node_ids


@pytest.mark.slow
def test_fixed_count_rewiring_many_steps():
    rng = np.random.default_rng(0)
    g = from_adjacency(random_binary(12, 0.3, rng))
    m = n_edges(g)
    regime = Regime(0.2, 0.0, 0.0)
    k = math.ceil(0.2 * m)
    steps = 0
    for s in range(100_000):
        h = perturb_step(g, regime, s)
        w = np.asarray(h.weights)
        assert n_edges(h) == m and np.all(np.diag(w) == 0) and w.max() == 1.0
        # k removals and k additions on disjoint pairs
        assert np.count_nonzero(w != g.weights) == 4 * k
        g = h
        steps += 1
    assert steps == 100_000


def test_background_deletion_rate():
    g = gen_er(81, 0.1, seed=0)
    m = n_edges(g)
    lost = [m - n_edges(perturb_step(g, Regime(0.0, 0.015, 0.0), s)) for s in range(500)]
    assert np.mean(lost) == pytest.approx(0.015 * m, rel=0.1)


def test_rewiring_prefers_hubs():
    # re-added edges land on high-degree endpoints more often than uniform pairs would
    g = gen_pa(81, 2, seed=0)
    deg = np.asarray(g.weights).sum(1)
    gained = []
    for s in range(100):
        h = perturb_step(g, Regime(0.2, 0, 0), s)
        new = np.argwhere(np.triu(np.asarray(h.weights) - g.weights) > 0)
        gained.extend(deg[new].sum(1))
    iu = np.triu_indices(81, 1)
    vacant = np.asarray(g.weights)[iu] == 0
    uniform = (deg[iu[0]] + deg[iu[1]])[vacant].mean()
    assert np.mean(gained) > uniform


def test_run_series_shape_and_determinism():
    g = gen_er(40, 0.1, seed=2)
    spec = DynamicsSpec(0.05, 0.0, 0.0, steps=1, seed=3)
    s1 = run_series(g, spec)
    assert len(s1) == 2 and s1[0] == g
    assert run_series(g, DynamicsSpec(0.05, 0.01, 0.01, steps=6, seed=9)).graphs == run_series(
        g, DynamicsSpec(0.05, 0.01, 0.01, steps=6, seed=9)
    ).graphs
    assert s1.params["seed"] == 3


def test_series_hamming_law():
    # one rewiring step moves 2 ceil(eta m) undirected pairs, i.e. 4 ceil(eta m) / (N(N-1)) ~ 4 eta s
    vals, targets = [], []
    for seed in range(200):
        g = gen_er(81, 0.1, seed=seed)
        s = n_edges(g) / (81 * 80)
        series = run_series(g, DynamicsSpec(0.05, 0.0, 0.0, steps=4, seed=seed))
        vals.append(np.mean([hamming(a, b) for a, b in zip(series.graphs, series.graphs[1:])]))
        targets.append(4 * 0.05 * s)
    assert np.mean(vals) == pytest.approx(np.mean(targets), rel=0.1)


def test_change_point_matches_plain_series_when_regimes_agree():
    g = gen_sbm(seed=1)
    spec = ChangePointSpec(calm=CALM, burst=CALM, seed=4)
    plain = run_series(g, DynamicsSpec(CALM.rewire_fraction, CALM.p_delete, CALM.p_add, steps=20, seed=4))
    assert change_point_series(g, spec).graphs == plain.graphs


def test_change_point_blocks():
    series = change_point_series(gen_sbm(seed=0))
    assert len(series) == 21
    assert series.blocks == ((0, 6), (6, 13), (13, 21))
    assert series.params["burst"] == {"rewire_fraction": 0.34, "p_delete": 0.06, "p_add": 0.06}
    spec = ChangePointSpec()
    assert [spec.regime_for(t) is BURST for t in (5, 6, 12, 13)] == [False, True, True, False]


def test_burst_steps_move_further():
    burst_means, calm_means = [], []
    spec = ChangePointSpec(burst=Regime(1.0, 0.06, 0.06), seed=0)
    for seed in range(200):
        series = change_point_series(gen_er(40, 0.1, seed=seed), ChangePointSpec(burst=spec.burst, seed=seed))
        steps = [jaccard_binary(a, b) for a, b in zip(series.graphs, series.graphs[1:])]
        # steps[t-1] produced G_t
        burst_means.append(np.mean(steps[5:12]))
        calm_means.append(np.mean(steps[:5] + steps[12:]))
    assert np.mean(burst_means) > np.mean(calm_means)


# -- regime ratios -------------------------------------------------------------------


def test_regime_ratio_examples():
    blocks = ((0, 3), (3, 6), (6, 9))
    flat = np.ones((9, 9)) - np.eye(9)
    assert regime_ratios(flat, blocks) == pytest.approx((1.0, 1.0))
    labels = np.repeat(np.arange(3), 3)
    d = np.where(labels[:, None] == labels[None], 1.0, 4.0)
    np.fill_diagonal(d, 0.0)
    assert regime_ratios(d, blocks) == pytest.approx((4.0, 4.0))
    with pytest.raises(BlockTooSmall):
        regime_ratios(flat, ((0, 1), (1, 6), (6, 9)))


def test_regime_ratio_nested_loop_oracle():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(21, 4))
    d = np.linalg.norm(x[:, None] - x[None], axis=2)
    blocks = ((0, 6), (6, 13), (13, 21))

    def mean(a, b):
        vals = [d[i, j] for i in range(*a) for j in range(*b) if i != j]
        return sum(vals) / len(vals)

    b1, b2, b3 = blocks
    r1 = mean(b1, b2) / math.sqrt(mean(b1, b1) * mean(b2, b2))
    r2 = mean(b3, b2) / math.sqrt(mean(b3, b3) * mean(b2, b2))
    got = regime_ratios(d, blocks)
    assert got[0] == pytest.approx(r1, abs=1e-12)
    assert got[1] == pytest.approx(r2, abs=1e-12)
    # the open-ended third block is clipped to the matrix
    assert regime_ratios(d, ((0, 6), (6, 13), (13, 40))) == got


@pytest.mark.slow
def test_change_point_detectable_by_structural_metrics():
    hits = {"hamming": 0, "jaccard": 0, "polynomial": 0}
    for seed in range(100):
        series = change_point_series(gen_sbm(seed=seed), ChangePointSpec(seed=seed))
        for metric in hits:
            r1, r2 = regime_ratios(distance_matrix(series.graphs, metric), series.blocks)
            hits[metric] += r1 > 1 and r2 > 1
    assert all(v >= 95 for v in hits.values()), hits
