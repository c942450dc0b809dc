"""Aligned graphs, their matrix representations and spectra.

Every distance in the package compares graphs defined on the same ordered
sequence of node identifiers. Binary graphs are simply graphs whose
non-zero weights all equal 1.

Representations::

    adjacency            A
    Laplacian            L = D - A
    normalized Laplacian I - D^{-1/2} A D^{-1/2}   (isolated nodes: zero row)
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse.csgraph as csgraph

from .errors import (
    DuplicateEdge,
    EigDecompositionFailure,
    InvalidGraph,
    NonPositiveWeight,
    NotAligned,
    SelfLoop,
    UnknownNode,
)


class Representation(str, enum.Enum):
    ADJACENCY = "adjacency"
    LAPLACIAN = "laplacian"
    NORMALIZED_LAPLACIAN = "normalized_laplacian"


@dataclass(frozen=True, eq=False)
class AlignedGraph:
    """Undirected weighted graph on an ordered set of identified nodes.

    Parameters
    ----------
    node_ids : sequence of str
        Distinct node identifiers; their order fixes the matrix layout.
    weights : (N, N) array_like
        Symmetric, non-negative, zero-diagonal weight matrix.
    """

    node_ids: tuple
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        ids = tuple(str(v) for v in self.node_ids)
        if len(set(ids)) != len(ids):
            raise InvalidGraph("node_ids must be unique")
        w = np.array(self.weights, dtype=float, copy=True)
        n = len(ids)
        if w.shape != (n, n):
            raise InvalidGraph(f"weights must be {n}x{n}, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InvalidGraph("weights must be finite")
        if np.any(w < 0):
            raise NonPositiveWeight("weights must be non-negative")
        if np.any(np.diag(w) != 0):
            raise SelfLoop("self loops are not allowed")
        if not np.array_equal(w, w.T):
            raise InvalidGraph("weights must be symmetric")
        w.setflags(write=False)
        object.__setattr__(self, "node_ids", ids)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return len(self.node_ids)

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"AlignedGraph(n={self.n}, edges={self.n_edges})"

    def __eq__(self, other):
        if not isinstance(other, AlignedGraph):
            return NotImplemented
        return self.node_ids == other.node_ids and np.array_equal(self.weights, other.weights)

    __hash__ = None

    @property
    def n_edges(self) -> int:
        """Number of undirected edges (non-zero upper-triangle entries)."""
        return int(np.count_nonzero(np.triu(self.weights, 1)))

    def degrees(self) -> np.ndarray:
        """Weighted degrees (row sums)."""
        return self.weights.sum(axis=1)

    def is_binary(self) -> bool:
        w = self.weights
        return bool(np.all((w == 0) | (w == 1)))

    def binarized(self) -> "AlignedGraph":
        return AlignedGraph(self.node_ids, (self.weights > 0).astype(float))

    def edges(self):
        """List of ``(i, j, weight)`` with ``i < j``, in row-major order."""
        iu, ju = np.nonzero(np.triu(self.weights, 1))
        return [(int(i), int(j), float(self.weights[i, j])) for i, j in zip(iu, ju)]

    def relabeled(self, order: Sequence[int]) -> "AlignedGraph":
        """Graph with nodes permuted: new node ``k`` is old node ``order[k]``."""
        order = np.asarray(order)
        return AlignedGraph([self.node_ids[k] for k in order], self.weights[np.ix_(order, order)])

    def subgraph(self, indices: Sequence[int]) -> "AlignedGraph":
        idx = np.asarray(indices, dtype=int)
        return AlignedGraph([self.node_ids[k] for k in idx], self.weights[np.ix_(idx, idx)])


def check_aligned(g: AlignedGraph, h: AlignedGraph) -> None:
    """Raise :class:`NotAligned` unless both graphs share the node sequence."""
    if g.node_ids != h.node_ids:
        if g.n != h.n:
            raise NotAligned(f"graphs have different sizes ({g.n} vs {h.n})")
        raise NotAligned("graphs have different node identifier sequences")


def from_edge_list(node_ids: Sequence, edges: Iterable) -> AlignedGraph:
    """Build a graph from ``(i, j, weight)`` triples over node identifiers.

    Endpoints are node identifiers (not indices). Each undirected pair may
    appear at most once and weights must be strictly positive.
    """
    ids = [str(v) for v in node_ids]
    index = {v: k for k, v in enumerate(ids)}
    if len(index) != len(ids):
        raise InvalidGraph("node_ids must be unique")
    w = np.zeros((len(ids), len(ids)))
    for edge in edges:
        if len(edge) == 2:
            a, b = edge
            weight = 1.0
        else:
            a, b, weight = edge
        a, b = str(a), str(b)
        for v in (a, b):
            if v not in index:
                raise UnknownNode(f"unknown node {v!r}")
        if a == b:
            raise SelfLoop(f"self loop on {a!r}")
        weight = float(weight)
        if not weight > 0 or not np.isfinite(weight):
            raise NonPositiveWeight(f"edge ({a!r}, {b!r}) has weight {weight}")
        i, j = index[a], index[b]
        if w[i, j] != 0:
            raise DuplicateEdge(f"duplicate edge ({a!r}, {b!r})")
        w[i, j] = w[j, i] = weight
    return AlignedGraph(ids, w)


def from_adjacency(weights, node_ids: Optional[Sequence] = None) -> AlignedGraph:
    weights = np.asarray(weights, dtype=float)
    if node_ids is None:
        node_ids = [f"v{k}" for k in range(weights.shape[0])]
    return AlignedGraph(node_ids, weights)


def empty_graph(n: int, prefix: str = "v") -> AlignedGraph:
    return AlignedGraph([f"{prefix}{k}" for k in range(n)], np.zeros((n, n)))


def complete_graph(n: int, prefix: str = "v") -> AlignedGraph:
    return AlignedGraph([f"{prefix}{k}" for k in range(n)], np.ones((n, n)) - np.eye(n))


def adjacency(g: AlignedGraph) -> np.ndarray:
    return np.array(g.weights)


def laplacian(g: AlignedGraph) -> np.ndarray:
    """Combinatorial Laplacian ``D - A``."""
    w = g.weights
    return np.diag(w.sum(axis=1)) - w


def normalized_laplacian(g: AlignedGraph) -> np.ndarray:
    """``I - D^{-1/2} A D^{-1/2}`` with all-zero rows for isolated nodes."""
    w = g.weights
    d = w.sum(axis=1)
    inv_sqrt = np.zeros_like(d)
    nz = d > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(d[nz])
    out = -(inv_sqrt[:, None] * w * inv_sqrt[None, :])
    out[np.diag_indices_from(out)] = nz.astype(float)
    return out


def representation_matrix(g: AlignedGraph, representation) -> np.ndarray:
    rep = Representation(representation)
    if rep is Representation.ADJACENCY:
        return adjacency(g)
    if rep is Representation.LAPLACIAN:
        return laplacian(g)
    return normalized_laplacian(g)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues (and optionally eigenvectors) of a representation."""

    representation: Representation
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.eigenvalues)


def zero_tolerance(eigenvalues) -> float:
    """Clamp threshold ``1e-9 * max(1, lambda_max)``."""
    lam_max = float(np.max(np.abs(eigenvalues))) if len(eigenvalues) else 0.0
    return 1e-9 * max(1.0, lam_max)


def spectrum(g: AlignedGraph, representation=Representation.LAPLACIAN, want_vectors: bool = False) -> Spectrum:
    """Eigendecomposition of the chosen representation.

    Eigenvalues come back sorted ascending; values with magnitude under
    :func:`zero_tolerance` are set to exactly 0. Laplacian spectra are
    additionally clamped to be non-negative, and normalized-Laplacian
    spectra to ``[0, 2]``.
    """
    rep = Representation(representation)
    m = representation_matrix(g, rep)
    try:
        if want_vectors:
            vals, vecs = scipy.linalg.eigh(m)
        else:
            vals = scipy.linalg.eigvalsh(m)
            vecs = None
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise EigDecompositionFailure(str(exc)) from exc
    if len(vals):
        vals = np.array(vals, dtype=float)
        vals[np.abs(vals) < zero_tolerance(vals)] = 0.0
        if rep is not Representation.ADJACENCY:
            vals = np.maximum(vals, 0.0)
        if rep is Representation.NORMALIZED_LAPLACIAN:
            vals = np.minimum(vals, 2.0)
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    if vecs is not None:
        vecs = vecs[:, order]
        vecs.setflags(write=False)
    vals.setflags(write=False)
    return Spectrum(rep, vals, vecs)


def laplacian_upper_bound(g: AlignedGraph) -> float:
    """Upper bound ``2 * max weighted degree`` on the largest Laplacian eigenvalue."""
    if g.n == 0:
        return 0.0
    return 2.0 * float(g.degrees().max())


def connected_components(g: AlignedGraph) -> int:
    """Number of connected components (isolated nodes count as components)."""
    n_comp, _ = csgraph.connected_components(g.weights > 0, directed=False)
    return int(n_comp)
