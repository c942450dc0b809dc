"""Synthetic graphs and graph time series with known structure.

Three topologies (Erdos-Renyi, preferential attachment, stochastic block
model) seed a series; each step then rewires a fraction of the edges towards
high-degree nodes and applies background deletion/addition noise. A
change-point series switches to a stronger regime for a block of steps.

Every function here is a pure function of its parameters and seed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis import _as_values
from .errors import AsymmetricC, BlockTooSmall, InvalidParams
from .graph import AlignedGraph

DEFAULT_SBM_SIZES = (27, 27, 27)
DEFAULT_SBM_C = ((0.4, 0.1, 0.001), (0.1, 0.2, 0.01), (0.001, 0.01, 0.5))


def _ids(n):
    return tuple(f"v{k}" for k in range(n))


def _rng(seed):
    return np.random.default_rng(seed)


def _check_prob(name, p):
    if not 0.0 <= p <= 1.0:
        raise InvalidParams(f"{name} must lie in [0, 1], got {p}")


def _from_upper(n, mask, ids=None):
    w = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    w[iu] = mask
    return AlignedGraph(_ids(n) if ids is None else ids, w + w.T)


def gen_er(n: int, p: float, seed=0) -> AlignedGraph:
    """G(n, p): every unordered pair is an edge independently with probability p."""
    if n < 2:
        raise InvalidParams("n must be at least 2")
    _check_prob("p", p)
    u = _rng(seed).random(n * (n - 1) // 2)
    return _from_upper(n, (u < p).astype(float))


def gen_pa(n: int, m: int = 2, seed=0) -> AlignedGraph:
    """Linear preferential attachment, ``m`` edges per arriving node.

    Starts from ``m`` isolated nodes; node ``m`` links to all of them and
    later nodes pick ``m`` distinct targets with probability proportional to
    degree. The result has exactly ``m (n - m)`` edges.
    """
    if not n > m >= 1:
        raise InvalidParams("need n > m >= 1")
    rng = _rng(seed)
    w = np.zeros((n, n))
    deg = np.zeros(n)
    for new in range(m, n):
        if new == m:
            targets = np.arange(m)
        else:
            p = deg[:new] / deg[:new].sum()
            targets = rng.choice(new, size=m, replace=False, p=p)
        w[new, targets] = w[targets, new] = 1.0
        deg[targets] += 1
        deg[new] += m
    return AlignedGraph(_ids(n), w)


def gen_sbm(sizes=DEFAULT_SBM_SIZES, C=DEFAULT_SBM_C, seed=0) -> AlignedGraph:
    """Stochastic block model; pair (i, j) is an edge with probability C[b(i), b(j)]."""
    sizes = [int(s) for s in sizes]
    c = np.asarray(C, dtype=float)
    if any(s < 1 for s in sizes):
        raise InvalidParams("block sizes must be positive")
    if c.shape != (len(sizes), len(sizes)):
        raise InvalidParams(f"C must be {len(sizes)}x{len(sizes)}")
    if not np.array_equal(c, c.T):
        raise AsymmetricC("connection matrix must be symmetric")
    if np.any((c < 0) | (c > 1)):
        raise InvalidParams("connection probabilities must lie in [0, 1]")
    block = np.repeat(np.arange(len(sizes)), sizes)
    n = len(block)
    iu, ju = np.triu_indices(n, 1)
    u = _rng(seed).random(len(iu))
    return _from_upper(n, (u < c[block[iu], block[ju]]).astype(float))


@dataclass(frozen=True)
class Regime:
    """Per-step perturbation strengths."""

    rewire_fraction: float = 0.0
    p_delete: float = 0.0
    p_add: float = 0.0

    def __post_init__(self):
        _check_prob("rewire_fraction", self.rewire_fraction)
        _check_prob("p_delete", self.p_delete)
        _check_prob("p_add", self.p_add)


@dataclass(frozen=True)
class DynamicsSpec(Regime):
    steps: int = 20
    seed: int = 0

    def __post_init__(self):
        super().__post_init__()
        if self.steps < 1:
            raise InvalidParams("steps must be at least 1")

    @property
    def regime(self) -> Regime:
        return Regime(self.rewire_fraction, self.p_delete, self.p_add)


CALM = Regime(0.085, 0.015, 0.015)
BURST = Regime(0.34, 0.06, 0.06)


@dataclass(frozen=True)
class ChangePointSpec:
    """Calm dynamics with a burst regime on steps ``[t_burst_start, t_burst_end)``."""

    calm: Regime = CALM
    burst: Regime = BURST
    t_burst_start: int = 6
    t_burst_end: int = 13
    steps: int = 20
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.t_burst_start < self.t_burst_end < self.steps:
            raise InvalidParams("need 0 < t_burst_start < t_burst_end < steps")

    @property
    def blocks(self) -> tuple:
        return ((0, self.t_burst_start), (self.t_burst_start, self.t_burst_end), (self.t_burst_end, self.steps + 1))

    def regime_for(self, t: int) -> Regime:
        """Regime of the step that produces ``G_t``."""
        return self.burst if self.t_burst_start <= t < self.t_burst_end else self.calm


def _children(seed, k):
    # like SeedSequence.spawn, but without mutating a caller-owned sequence
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    return [np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key + (c,)) for c in range(k)]


def perturb_step(g: AlignedGraph, regime: Regime, step_seed) -> AlignedGraph:
    """One step of the dynamics on a binary graph.

    1. Remove ``ceil(eta |E|)`` edges chosen uniformly.
    2. Add as many edges on pairs that were vacant before the step, drawn
       without replacement with weight ``(d_i + 1)(d_j + 1)`` (degrees after
       removal).
    3. Delete each surviving original edge with probability ``p_delete``
       and add each still-vacant pair with probability ``p_add``.

    The three stages use independent child seeds of ``step_seed``.
    """
    if not g.is_binary():
        raise InvalidParams("perturb_step needs a binary graph")
    n = g.n
    rng_rewire, rng_del, rng_add = (np.random.default_rng(s) for s in _children(step_seed, 3))
    iu, ju = np.triu_indices(n, 1)
    present = g.weights[iu, ju] > 0
    state = present.copy()
    edge_idx = np.flatnonzero(present)

    r = math.ceil(regime.rewire_fraction * len(edge_idx))
    if r:
        removed = rng_rewire.choice(edge_idx, size=r, replace=False)
        state[removed] = False
        vacant = np.flatnonzero(~present)
        r_add = min(r, len(vacant))
        if r_add:
            deg = np.bincount(iu[state], minlength=n) + np.bincount(ju[state], minlength=n)
            weight = (deg[iu[vacant]] + 1.0) * (deg[ju[vacant]] + 1.0)
            added = rng_rewire.choice(vacant, size=r_add, replace=False, p=weight / weight.sum())
            state[added] = True

    survivors = present & state
    if regime.p_delete > 0:
        drop = rng_del.random(len(state)) < regime.p_delete
        state[survivors & drop] = False
    if regime.p_add > 0:
        vacant_now = ~state
        grow = rng_add.random(len(state)) < regime.p_add
        state[vacant_now & grow] = True

    return _from_upper(n, state.astype(float), g.node_ids)


@dataclass(frozen=True, eq=False)
class GraphSeries:
    """A graph time series ``[G_0, ..., G_steps]`` with its provenance."""

    graphs: tuple
    params: dict = field(default_factory=dict)
    blocks: tuple | None = None

    def __len__(self):
        return len(self.graphs)

    def __getitem__(self, k):
        return self.graphs[k]

    def __iter__(self):
        return iter(self.graphs)


def run_series(initial: AlignedGraph, spec: DynamicsSpec) -> GraphSeries:
    """Apply ``spec.steps`` perturbation steps, one child seed per step."""
    graphs = [initial]
    for s in _children(spec.seed, spec.steps):
        graphs.append(perturb_step(graphs[-1], spec.regime, s))
    params = {
        "rewire_fraction": spec.rewire_fraction,
        "p_delete": spec.p_delete,
        "p_add": spec.p_add,
        "steps": spec.steps,
        "seed": spec.seed,
    }
    return GraphSeries(tuple(graphs), params)


def change_point_series(initial: AlignedGraph, spec: ChangePointSpec = ChangePointSpec()) -> GraphSeries:
    """Series whose dynamics switch to ``spec.burst`` between the two change points.

    Step seeds are derived exactly as in :func:`run_series`, so a ``ChangePointSpec`` with
    ``burst == calm`` reproduces the plain series.
    """
    graphs = [initial]
    for t, s in enumerate(_children(spec.seed, spec.steps), start=1):
        graphs.append(perturb_step(graphs[-1], spec.regime_for(t), s))
    params = {
        "calm": asdict(spec.calm),
        "burst": asdict(spec.burst),
        "t_burst_start": spec.t_burst_start,
        "t_burst_end": spec.t_burst_end,
        "steps": spec.steps,
        "seed": spec.seed,
    }
    return GraphSeries(tuple(graphs), params, spec.blocks)


def _block_mean(v, a, b):
    sub = v[np.ix_(a, b)]
    if a is b:
        k = len(a)
        return sub.sum() / (k * (k - 1))
    return sub.mean()


def regime_ratios(d, blocks) -> tuple[float, float]:
    """Between-block over geometric-mean within-block distances.

    ``r1 = D12 / sqrt(D11 D22)`` and ``r2 = D32 / sqrt(D33 D22)`` where
    ``blocks`` gives three ``(start, stop)`` index ranges. Within-block means
    run over distinct pairs.
    """
    v = _as_values(d)
    if len(blocks) != 3:
        raise InvalidParams("need exactly three blocks")
    idx = []
    for lo, hi in blocks:
        hi = min(hi, v.shape[0])
        if hi - lo < 2:
            raise BlockTooSmall(f"block [{lo}, {hi}) has fewer than 2 members")
        idx.append(np.arange(lo, hi))
    b1, b2, b3 = idx
    d11, d22, d33 = (_block_mean(v, b, b) for b in idx)
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = _block_mean(v, b1, b2) / np.sqrt(d11 * d22)
        r2 = _block_mean(v, b3, b2) / np.sqrt(d33 * d22)
    return float(r1), float(r2)
