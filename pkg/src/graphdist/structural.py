"""Edge-overlap distances: Hamming and Jaccard.

Weighted inputs are compared on their raw weights by :func:`hamming` (so
values above 1 are possible); binarize first to stay in ``[0, 1]``.
"""

import warnings

import numpy as np

from .errors import BothEmpty, EmptyGraphsWarning, InvalidGraph, ZeroSparsity
from .graph import AlignedGraph, check_aligned


def hamming(g: AlignedGraph, h: AlignedGraph) -> float:
    """Normalized Hamming distance ``||A - B||_{1,1} / (N (N - 1))``."""
    check_aligned(g, h)
    n = g.n
    if n < 2:
        raise InvalidGraph("hamming needs at least 2 nodes")
    return float(np.abs(g.weights - h.weights).sum() / (n * (n - 1)))


def l1_distance(g: AlignedGraph, h: AlignedGraph) -> float:
    """Unnormalized entrywise L1 distance between adjacency matrices."""
    check_aligned(g, h)
    return float(np.abs(g.weights - h.weights).sum())


def _both_empty(strict):
    if strict:
        raise BothEmpty("both graphs are empty")
    warnings.warn("both graphs are empty; returning 0", EmptyGraphsWarning, stacklevel=3)
    return 0.0


def jaccard_binary(g: AlignedGraph, h: AlignedGraph, strict: bool = False) -> float:
    """Symmetric difference over union of the undirected edge sets.

    Any positive weight counts as an edge. Two empty graphs are at distance
    0 (with an :class:`EmptyGraphsWarning`) unless ``strict`` is set, in
    which case :class:`BothEmpty` is raised.
    """
    check_aligned(g, h)
    a = np.triu(g.weights, 1) > 0
    b = np.triu(h.weights, 1) > 0
    union = np.count_nonzero(a | b)
    if union == 0:
        return _both_empty(strict)
    inter = np.count_nonzero(a & b)
    return (union - inter) / union


def jaccard_weighted(g: AlignedGraph, h: AlignedGraph, strict: bool = False) -> float:
    """``1 - sum(min(A, B)) / sum(max(A, B))``."""
    check_aligned(g, h)
    big = np.maximum(g.weights, h.weights).sum()
    if big == 0:
        return _both_empty(strict)
    small = np.minimum(g.weights, h.weights).sum()
    # (max - min) / max rather than 1 - min / max: bitwise equal to the binary form
    return float((big - small) / big)


def mean_sparsity(g: AlignedGraph, h: AlignedGraph) -> float:
    """Average fraction of non-zero off-diagonal adjacency entries.

    Edges are counted as matrix entries, so an undirected edge counts twice:
    ``(nnz(A) + nnz(B)) / (2 N (N - 1))``. This is the normalization under
    which :func:`jaccard_from_hamming` reproduces :func:`jaccard_binary`.
    """
    check_aligned(g, h)
    n = g.n
    nnz = np.count_nonzero(g.weights) + np.count_nonzero(h.weights)
    return nnz / (2.0 * n * (n - 1))


def jaccard_from_hamming(d_h: float, mean_sparsity: float) -> float:
    """Jaccard distance recovered from Hamming distance and mean sparsity.

    ``(d_h / S) / (1 + d_h / (2 S))``; exact for binary graphs.
    """
    if d_h < 0:
        raise ValueError("d_h must be non-negative")
    if not mean_sparsity > 0:
        raise ZeroSparsity("mean sparsity must be positive")
    ratio = d_h / mean_sparsity
    return ratio / (1.0 + ratio / 2.0)


def steinhaus_jaccard(g: AlignedGraph, h: AlignedGraph) -> float:
    """Steinhaus transform of the L1 adjacency distance, anchored at the empty graph.

    ``2 d(g, h) / (d(g, 0) + d(h, 0) + d(g, h))``; equals :func:`jaccard_binary`
    on binary graphs.
    """
    check_aligned(g, h)
    d_gh = np.abs(g.weights - h.weights).sum()
    denom = g.weights.sum() + h.weights.sum() + d_gh
    if denom == 0:
        return 0.0
    return float(2.0 * d_gh / denom)
