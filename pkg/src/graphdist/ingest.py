"""Graph construction from raw tables and corpora.

Correlation graphs keep only associations at or above a positive threshold
and use the correlation value as the edge weight.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import DegenerateColumnWarning, EmptyInput, EmptySupport
from .graph import AlignedGraph, check_aligned


@dataclass(frozen=True, eq=False)
class AbundanceTable:
    """Samples (rows) by features (columns) of non-negative values."""

    row_ids: tuple
    col_ids: tuple
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        rows, cols = tuple(map(str, self.row_ids)), tuple(map(str, self.col_ids))
        if v.shape != (len(rows), len(cols)):
            raise ValueError(f"values shape {v.shape} does not match ids ({len(rows)}, {len(cols)})")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "row_ids", rows)
        object.__setattr__(self, "col_ids", cols)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class ItemSetCorpus:
    """Documents given as sets of item identifiers drawn from ``universe``."""

    universe: tuple
    documents: tuple

    def __post_init__(self):
        universe = tuple(map(str, self.universe))
        known = set(universe)
        docs = tuple(frozenset(map(str, d)) for d in self.documents)
        for k, doc in enumerate(docs):
            unknown = doc - known
            if unknown:
                raise ValueError(f"document {k} has items outside the universe: {sorted(unknown)}")
        object.__setattr__(self, "universe", universe)
        object.__setattr__(self, "documents", docs)


def _threshold_graph(node_ids, corr, threshold, degenerate, what):
    if degenerate:
        names = [node_ids[k] for k in degenerate]
        warnings.warn(f"{what}: constant columns produce no edges: {names}", DegenerateColumnWarning, stacklevel=3)
    w = np.where(corr >= threshold, corr, 0.0)
    w = np.nan_to_num(w, nan=0.0)
    np.fill_diagonal(w, 0.0)
    w = np.maximum(w, 0.0)
    w = np.triu(w, 1)
    return AlignedGraph(node_ids, w + w.T)


def kendall_tau_matrix(values: np.ndarray) -> np.ndarray:
    """Pairwise Kendall tau-b between columns; NaN where a column is constant."""
    n_cols = values.shape[1]
    out = np.full((n_cols, n_cols), np.nan)
    for i in range(n_cols):
        out[i, i] = 1.0
        for j in range(i + 1, n_cols):
            tau = stats.kendalltau(values[:, i], values[:, j], variant="b").statistic
            out[i, j] = out[j, i] = tau
    return out


def kendall_tau_graph(table: AbundanceTable, threshold: float = 0.5) -> AlignedGraph:
    """Keep column pairs whose Kendall tau-b is at least ``threshold``.

    Constant columns have no defined tau; they get no edges and are
    reported through a :class:`DegenerateColumnWarning`.
    """
    if len(table.row_ids) < 2:
        raise ValueError("need at least 2 rows")
    if not 0 <= threshold <= 1:
        raise ValueError("threshold must lie in [0, 1]")
    v = table.values
    degenerate = [k for k in range(v.shape[1]) if np.all(v[:, k] == v[0, k])]
    corr = kendall_tau_matrix(v)
    return _threshold_graph(table.col_ids, corr, threshold, degenerate, "kendall")


def pearson_matrix(values: np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    centred = v - v.mean(axis=0)
    norms = np.sqrt((centred**2).sum(axis=0))
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = (centred.T @ centred) / np.outer(norms, norms)
    corr[:, norms == 0] = np.nan
    corr[norms == 0, :] = np.nan
    return np.clip(corr, -1.0, 1.0)


def pearson_threshold_graph(series: AbundanceTable, threshold: float) -> AlignedGraph:
    """Keep column pairs whose Pearson correlation is at least ``threshold``."""
    if len(series.row_ids) < 3:
        raise ValueError("need at least 3 rows")
    v = series.values
    degenerate = [k for k in range(v.shape[1]) if np.all(v[:, k] == v[0, k])]
    return _threshold_graph(series.col_ids, pearson_matrix(v), threshold, degenerate, "pearson")


def pearson_quantile_threshold(matrices: Sequence[np.ndarray], q: float = 0.97) -> float:
    """Mean over matrices of the ``q``-quantile of their off-diagonal entries.

    Each unordered pair counts once; quantiles interpolate linearly.
    """
    if not len(matrices):
        raise EmptyInput("no correlation matrices given")
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    out = []
    for m in matrices:
        m = np.asarray(m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("correlation matrices must be square")
        if not np.allclose(m, m.T):
            raise ValueError("correlation matrices must be symmetric")
        iu = np.triu_indices(m.shape[0], 1)
        if not len(iu[0]):
            raise EmptyInput("matrix has no off-diagonal entries")
        out.append(np.quantile(m[iu], q, method="linear"))
    return float(np.mean(out))


def incidence_matrix(corpus: ItemSetCorpus) -> np.ndarray:
    """Binary documents-by-items matrix."""
    index = {v: k for k, v in enumerate(corpus.universe)}
    b = np.zeros((len(corpus.documents), len(corpus.universe)))
    for d, doc in enumerate(corpus.documents):
        for item in doc:
            b[d, index[item]] = 1.0
    return b


def cooccurrence_graph(corpus: ItemSetCorpus) -> AlignedGraph:
    """Edge weight = number of documents containing both items."""
    b = incidence_matrix(corpus)
    w = b.T @ b
    np.fill_diagonal(w, 0.0)
    return AlignedGraph(corpus.universe, w)


def restrict_to_union_support(g: AlignedGraph, h: AlignedGraph):
    """Restrict both graphs to nodes with an edge in ``g`` or in ``h``."""
    check_aligned(g, h)
    keep = np.flatnonzero((g.degrees() > 0) | (h.degrees() > 0))
    if not len(keep):
        raise EmptySupport("both graphs are empty")
    return g.subgraph(keep), h.subgraph(keep)

