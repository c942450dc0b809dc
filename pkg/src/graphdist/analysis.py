"""Dataset-level analysis on top of pairwise graph distances.

Given a list of aligned graphs and a metric from :mod:`graphdist.metrics`,
build the distance matrix, then test whether labels explain its structure
(permutation tests on metagraphs, variance ratios), embed it (classical
MDS) or cluster it.

Permutation tests draw their label shuffles in fixed-size blocks. Block
``b`` is seeded from ``SeedSequence(seed, spawn_key=(b,))``, so the set of
shuffles depends only on the seed and ``n_perm``, never on ``workers``.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ClassTooSmall,
    DegenerateLabels,
    EmptyInput,
    GraphDistError,
    KTooLarge,
    NotAligned,
    PairError,
)
from .graph import AlignedGraph
from .metrics import get_metric

DEFAULT_PERMUTATIONS = 50_000
PERMUTATION_BLOCK = 1024
_REL_TIE = 1e-10


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric matrix of pairwise graph distances with provenance."""

    graph_ids: tuple
    values: np.ndarray
    metric: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = tuple(map(str, self.graph_ids))
        v = np.array(self.values, dtype=float)
        n = len(ids)
        if len(set(ids)) != n:
            raise ValueError("graph ids must be unique")
        if v.shape != (n, n):
            raise ValueError(f"values shape {v.shape} does not match {n} graph ids")
        if not np.all(np.isfinite(v)):
            raise ValueError("distances must be finite")
        if np.any(v < 0):
            raise ValueError("distances must be non-negative")
        if np.any(np.diag(v) != 0):
            raise ValueError("diagonal must be exactly zero")
        if not np.array_equal(v, v.T):
            raise ValueError("distance matrix must be exactly symmetric")
        v.setflags(write=False)
        object.__setattr__(self, "graph_ids", ids)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "params", dict(self.params))

    @property
    def n(self) -> int:
        return len(self.graph_ids)

    def __eq__(self, other):
        if not isinstance(other, DistanceMatrix):
            return NotImplemented
        return (
            self.graph_ids == other.graph_ids
            and np.array_equal(self.values, other.values)
            and self.metric == other.metric
            and self.params == other.params
        )

    def subset(self, indices) -> "DistanceMatrix":
        idx = np.asarray(indices, dtype=int)
        return DistanceMatrix(
            tuple(self.graph_ids[k] for k in idx), self.values[np.ix_(idx, idx)], self.metric, self.params
        )


def _as_values(d) -> np.ndarray:
    return d.values if isinstance(d, DistanceMatrix) else np.asarray(d, dtype=float)


# ---------------------------------------------------------------- distances


def failure_reason(exc: BaseException) -> str:
    """Short snake_case tag for a metric failure, e.g. ``"disconnected"``."""
    name = type(exc).__name__
    out = [name[0].lower()]
    for ch in name[1:]:
        if ch.isupper():
            out.append("_")
        out.append(ch.lower())
    return "".join(out)


def pairwise_values(
    graphs: Sequence[AlignedGraph],
    metric: str | Callable,
    params: dict | None = None,
    workers: int = 1,
    on_error: str = "raise",
):
    """Evaluate a metric on every unordered pair.

    Returns ``(values, failures)``. With ``on_error="null"`` a failing pair
    gets NaN in ``values`` and an entry ``(i, j) -> reason`` in ``failures``;
    with ``"raise"`` the first failure (in pair order) raises
    :class:`PairError`.
    """
    if on_error not in ("raise", "null"):
        raise ValueError("on_error must be 'raise' or 'null'")
    n = len(graphs)
    if n < 2:
        raise EmptyInput("need at least 2 graphs")
    for k in range(1, n):
        if graphs[k].node_ids != graphs[0].node_ids:
            raise NotAligned(f"graphs 0 and {k} have different node ids")
    func = get_metric(metric) if isinstance(metric, str) else metric
    params = dict(params or {})
    pairs = list(itertools.combinations(range(n), 2))

    def run(pair):
        i, j = pair
        try:
            return float(func(graphs[i], graphs[j], **params)), None
        except GraphDistError as exc:
            return np.nan, exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, pairs))
    else:
        results = [run(p) for p in pairs]

    values = np.zeros((n, n))
    failures = {}
    for (i, j), (value, exc) in zip(pairs, results):
        if exc is not None:
            if on_error == "raise":
                raise PairError(i, j, exc) from exc
            failures[(i, j)] = failure_reason(exc)
        values[i, j] = values[j, i] = value
    return values, failures


def distance_matrix(
    graphs: Sequence[AlignedGraph],
    metric: str | Callable,
    params: dict | None = None,
    graph_ids: Sequence | None = None,
    workers: int = 1,
) -> DistanceMatrix:
    """Pairwise distances ``H[i, j] = d(graphs[i], graphs[j])``.

    Each unordered pair is evaluated once and mirrored, so the result is
    exactly symmetric. Metric failures are re-raised as :class:`PairError`.
    """
    values, _ = pairwise_values(graphs, metric, params, workers, "raise")
    if graph_ids is None:
        graph_ids = [f"g{k}" for k in range(len(graphs))]
    name = metric if isinstance(metric, str) else getattr(metric, "__name__", "custom")
    return DistanceMatrix(tuple(graph_ids), values, name, dict(params or {}))


# --------------------------------------------------------------- metagraphs


def knn_metagraph(d, k: int) -> list[tuple[int, int]]:
    """Undirected union of each graph's ``k`` nearest neighbours.

    Equal distances are resolved in favour of the lower index. Returns sorted
    ``(i, j)`` pairs with ``i < j``.
    """
    v = _as_values(d)
    n = v.shape[0]
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > n - 1:
        raise KTooLarge(f"k={k} exceeds n-1={n - 1}")
    edges = set()
    idx = np.arange(n)
    for i in range(n):
        others = idx[idx != i]
        order = others[np.lexsort((others, v[i, others]))]
        for j in order[:k]:
            edges.add((min(i, int(j)), max(i, int(j))))
    return sorted(edges)


def mst_metagraph(d) -> list[tuple[int, int]]:
    """Kruskal minimum spanning tree of the complete metagraph.

    Candidate edges are scanned by ``(distance, i, j)`` so ties resolve to the
    lexicographically smallest pair.
    """
    v = _as_values(d)
    n = v.shape[0]
    if n < 2:
        raise EmptyInput("need at least 2 graphs")
    iu, ju = np.triu_indices(n, 1)
    order = np.lexsort((ju, iu, v[iu, ju]))
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    tree = []
    for e in order:
        i, j = int(iu[e]), int(ju[e])
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
            tree.append((i, j))
            if len(tree) == n - 1:
                break
    return sorted(tree)


# ------------------------------------------------------- permutation testing


class Tail(str, Enum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class TestReport:
    """Outcome of a permutation test.

    ``p_value = (1 + #{permuted at or beyond observed}) / (1 + n_permutations)``.
    """

    __test__ = False  # not a pytest class

    test: str
    statistic: float
    n_permutations: int
    p_value: float
    tail: Tail
    seed: int

    def to_dict(self) -> dict:
        return {
            "test": self.test,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "tail": self.tail.value,
            "n_permutations": self.n_permutations,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return seed


def permutation_block(n: int, seed: int, block: int, size: int) -> np.ndarray:
    """Rows of random permutations of ``range(n)`` for block index ``block``."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    return rng.permuted(np.tile(np.arange(n), (size, 1)), axis=1)


def permutation_test(
    name: str,
    stat: Callable[[np.ndarray], np.ndarray],
    n: int,
    tail: Tail,
    n_perm: int,
    seed: int,
    workers: int = 1,
    exact: bool = False,
) -> TestReport:
    """Generic label-permutation test.

    ``stat`` maps an ``(m, n)`` array of index permutations to ``m``
    statistics; the identity permutation gives the observed value. Set
    ``exact`` for integer-valued statistics, otherwise values within a
    relative ``1e-10`` of the observed one count as ties.
    """
    if n_perm < 1:
        raise ValueError("n_perm must be at least 1")
    seed = _check_seed(seed)
    tail = Tail(tail)
    observed = float(stat(np.arange(n)[None, :])[0])
    tol = 0.0 if exact else _REL_TIE * max(1.0, abs(observed))
    n_blocks = -(-n_perm // PERMUTATION_BLOCK)

    def count(b):
        size = min(PERMUTATION_BLOCK, n_perm - b * PERMUTATION_BLOCK)
        values = stat(permutation_block(n, seed, b, size))
        if tail is Tail.UPPER:
            return int(np.count_nonzero(values >= observed - tol))
        return int(np.count_nonzero(values <= observed + tol))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(count, range(n_blocks)))
    else:
        counts = [count(b) for b in range(n_blocks)]
    p = (1 + sum(counts)) / (1 + n_perm)
    return TestReport(name, observed, int(n_perm), p, tail, seed)


def _edge_arrays(edges, n):
    e = np.asarray(list(edges), dtype=int).reshape(-1, 2)
    if e.size and (e.min() < 0 or e.max() >= n):
        raise ValueError("metagraph edge refers to an unknown graph index")
    return e[:, 0], e[:, 1]


def fr_test_discrete(
    edges,
    labels: Sequence,
    n_perm: int = DEFAULT_PERMUTATIONS,
    seed: int = 0,
    workers: int = 1,
    strict: bool = True,
) -> TestReport:
    """Count of same-class metagraph edges against shuffled labels.

    Large counts mean classes cluster in the metagraph (upper tail). A
    single-class labelling raises :class:`DegenerateLabels` unless
    ``strict=False``, in which case every shuffle ties and ``p = 1``.
    """
    _, codes = np.unique(np.asarray(labels), return_inverse=True)
    n = len(codes)
    if strict and codes.max(initial=0) == 0:
        raise DegenerateLabels("labels contain a single class")
    u, v = _edge_arrays(edges, n)

    def stat(perms):
        lab = codes[perms]
        return np.count_nonzero(lab[:, u] == lab[:, v], axis=1)

    return permutation_test("fr_discrete", stat, n, Tail.UPPER, n_perm, seed, workers, exact=True)


def fr_test_continuous(
    edges,
    labels: Sequence[float],
    n_perm: int = DEFAULT_PERMUTATIONS,
    seed: int = 0,
    workers: int = 1,
) -> TestReport:
    """Sum of ``|label_i - label_j|`` over metagraph edges (lower tail)."""
    x = np.asarray(labels, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("labels must be finite")
    n = len(x)
    u, v = _edge_arrays(edges, n)

    def stat(perms):
        lab = x[perms]
        return np.abs(lab[:, u] - lab[:, v]).sum(axis=1)

    return permutation_test("fr_continuous", stat, n, Tail.LOWER, n_perm, seed, workers)


def _class_codes(classes, min_size=2):
    names, codes = np.unique(np.asarray(classes), return_inverse=True)
    sizes = np.bincount(codes, minlength=len(names))
    if len(names) < 2:
        raise DegenerateLabels("need at least two classes")
    if sizes.min() < min_size:
        small = [str(names[k]) for k in np.flatnonzero(sizes < min_size)]
        raise ClassTooSmall(f"classes with fewer than {min_size} members: {small}")
    return codes, len(names), sizes


def _class_sums(v, onehot):
    """``S[b, p, q]`` = sum of distances from class p to class q under shuffle b."""
    return np.einsum("bip,ij,bjq->bpq", onehot, v, onehot, optimize=True)


def _anova_stat(v, codes, n_classes, sizes, multiclass):
    n = len(codes)
    eye = np.eye(n_classes)
    within_pairs = sizes * (sizes - 1.0)
    weights = sizes / n

    def stat(perms):
        onehot = eye[codes[perms]]
        s = _class_sums(v, onehot)
        within = np.diagonal(s, axis1=1, axis2=2) / within_pairs
        denom = within @ weights
        if multiclass:
            to_rest = s.sum(axis=2) - np.diagonal(s, axis1=1, axis2=2)
            numer = (to_rest / (sizes * (n - sizes))).mean(axis=1)
        else:
            numer = s[:, 0, 1] / (sizes[0] * sizes[1])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = numer / denom
        # zero within-class spread: infinite separation, or no signal at all
        ratio = np.where(denom == 0, np.where(numer > 0, np.inf, 1.0), ratio)
        return ratio

    return stat


def anova_ratio_two_class(
    d, classes: Sequence, n_perm: int = DEFAULT_PERMUTATIONS, seed: int = 0, workers: int = 1
) -> TestReport:
    """Between-class mean distance over size-weighted within-class means.

    Within-class means run over distinct pairs only. Values near 1 mean no
    class effect; the test is upper-tailed.
    """
    v = _as_values(d)
    codes, k, sizes = _class_codes(classes)
    if k != 2:
        raise DegenerateLabels(f"expected exactly two classes, got {k}")
    if len(codes) != v.shape[0]:
        raise ValueError("labels do not match the distance matrix")
    stat = _anova_stat(v, codes, k, sizes.astype(float), multiclass=False)
    return permutation_test("anova_two_class", stat, len(codes), Tail.UPPER, n_perm, seed, workers)


def anova_ratio_multiclass(
    d, classes: Sequence, n_perm: int = DEFAULT_PERMUTATIONS, seed: int = 0, workers: int = 1
) -> TestReport:
    """K-class variance ratio.

    Numerator: average over classes of the mean distance from a class to all
    graphs outside it. Denominator: size-weighted mean within-class distance.
    With two classes this is the two-class ratio.
    """
    v = _as_values(d)
    codes, k, sizes = _class_codes(classes)
    if len(codes) != v.shape[0]:
        raise ValueError("labels do not match the distance matrix")
    stat = _anova_stat(v, codes, k, sizes.astype(float), multiclass=True)
    return permutation_test("anova_multiclass", stat, len(codes), Tail.UPPER, n_perm, seed, workers)


# ---------------------------------------------------------------- embedding


@dataclass(frozen=True)
class MDSResult:
    coordinates: np.ndarray
    eigenvalues: np.ndarray
    clamped_mass: float


def classical_mds_full(d, dims: int) -> MDSResult:
    """Torgerson scaling plus diagnostics.

    ``eigenvalues`` holds all eigenvalues of the double-centred matrix in
    descending order; ``clamped_mass`` is the summed magnitude of the
    negative ones, zero for Euclidean-realizable input.
    """
    v = _as_values(d)
    n = v.shape[0]
    if not 1 <= dims <= max(n - 1, 1):
        raise ValueError(f"dims must lie in [1, {max(n - 1, 1)}]")
    j = np.eye(n) - 1.0 / n
    b = -0.5 * j @ (v**2) @ j
    b = (b + b.T) / 2
    lam, vec = np.linalg.eigh(b)
    order = np.argsort(-lam, kind="stable")
    lam, vec = lam[order], vec[:, order]
    coords = vec[:, :dims] * np.sqrt(np.maximum(lam[:dims], 0.0))
    for c in range(dims):
        nz = np.flatnonzero(np.abs(coords[:, c]) > 1e-12)
        if len(nz) and coords[nz[0], c] < 0:
            coords[:, c] = -coords[:, c]
    coords[np.abs(coords) <= 1e-12] = 0.0
    return MDSResult(coords, lam, float(-lam[lam < 0].sum()))


def classical_mds(d, dims: int = 2) -> np.ndarray:
    """``n x dims`` coordinates whose distances approximate ``d``.

    Negative eigenvalues are clamped to zero. Columns follow descending
    eigenvalue; each column's first nonzero entry is positive.
    """
    return classical_mds_full(d, dims).coordinates


# --------------------------------------------------------------- clustering


class Linkage(str, Enum):
    AVERAGE = "average"
    SINGLE = "single"
    COMPLETE = "complete"


def agglomerative_cluster(d, k: int, linkage: str = "average") -> np.ndarray:
    """Bottom-up merging until ``k`` clusters remain.

    The closest pair of clusters merges first; equal distances go to the
    pair with the smallest (lower index, upper index). Labels are numbered
    by first appearance.
    """
    linkage = Linkage(linkage)
    v = _as_values(d).astype(float).copy()
    n = v.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}]")
    active = np.ones(n, dtype=bool)
    sizes = np.ones(n)
    owner = np.arange(n)
    np.fill_diagonal(v, np.inf)
    for _ in range(n - k):
        masked = np.where(np.outer(active, active), v, np.inf)
        masked[np.tril_indices(n)] = np.inf
        i, j = np.unravel_index(np.argmin(masked), masked.shape)
        if linkage is Linkage.SINGLE:
            row = np.minimum(v[i], v[j])
        elif linkage is Linkage.COMPLETE:
            row = np.maximum(v[i], v[j])
        else:
            row = (sizes[i] * v[i] + sizes[j] * v[j]) / (sizes[i] + sizes[j])
        v[i, :] = row
        v[:, i] = row
        v[i, i] = np.inf
        sizes[i] += sizes[j]
        active[j] = False
        owner[owner == j] = i
    _, first, codes = np.unique(owner, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=int)
    rank[np.argsort(first)] = np.arange(len(first))
    return rank[codes]


def _entropy(counts):
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def homogeneity_completeness(predicted: Sequence, truth: Sequence) -> tuple[float, float]:
    """Entropy-based cluster scores (natural log).

    ``h = 1 - H(truth | pred) / H(truth)`` and ``c = 1 - H(pred | truth) / H(pred)``,
    each defined as 1 when its denominator entropy is zero.
    """
    predicted, truth = np.asarray(predicted), np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError("predicted and truth must have equal length")
    _, pc = np.unique(predicted, return_inverse=True)
    _, tc = np.unique(truth, return_inverse=True)
    table = np.zeros((tc.max(initial=0) + 1, pc.max(initial=0) + 1))
    np.add.at(table, (tc, pc), 1.0)
    n = table.sum()
    h_truth = _entropy(table.sum(axis=1))
    h_pred = _entropy(table.sum(axis=0))
    with np.errstate(divide="ignore", invalid="ignore"):
        joint = table / n
        h_truth_given_pred = -np.nansum(joint * np.log(table / table.sum(axis=0, keepdims=True)))
        h_pred_given_truth = -np.nansum(joint * np.log(table / table.sum(axis=1, keepdims=True)))
    h = 1.0 if h_truth == 0 else 1.0 - h_truth_given_pred / h_truth
    c = 1.0 if h_pred == 0 else 1.0 - h_pred_given_truth / h_pred
    return float(h), float(c)


@dataclass(frozen=True)
class OrderingResult:
    fraction: float
    ties: bool


def ordering_consistency(d) -> OrderingResult:
    """Share of interior time points whose nearest other point is adjacent in time.

    Ties in the nearest distance go to the lowest index; ``ties`` reports
    whether any interior point had more than one nearest neighbour.
    """
    v = _as_values(d)
    n = v.shape[0]
    if n < 3:
        raise ValueError("need at least 3 time points")
    hits, ties = 0, False
    for t in range(1, n - 1):
        row = v[t].astype(float).copy()
        row[t] = np.inf
        best = row.min()
        nearest = np.flatnonzero(row == best)
        ties |= len(nearest) > 1
        hits += int(nearest[0] in (t - 1, t + 1))
    return OrderingResult(hits / (n - 2), bool(ties))
