"""Neighbourhood-scale dissimilarities.

* polynomial distance on decay-weighted adjacency powers,
* betweenness-centrality drift,
* heat-kernel wavelet signatures (exact or Chebyshev) with per-node drifts.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import ive

from .errors import InvalidGraph
from .graph import AlignedGraph, Representation, check_aligned, laplacian, laplacian_upper_bound, spectrum

DEFAULT_TAU = 1.2
MULTISCALE_TAUS = tuple(float(t) for t in range(1, 30))
DEFAULT_CHEBYSHEV_ORDER = 40


# -- polynomial distance -----------------------------------------------------


@dataclass(frozen=True)
class PolynomialSpec:
    """``P(x) = sum_{k=1..K} x**k / (N-1)**(alpha (k-1))``."""

    K: int = 3
    alpha: float = 0.9

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ValueError("K must be a positive integer")
        if self.alpha < 0 or not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite and >= 0")

    def coefficients(self, n: int) -> np.ndarray:
        if n < 2:
            raise InvalidGraph("polynomial distance needs N >= 2")
        k = np.arange(self.K)
        return (n - 1.0) ** (-self.alpha * k)


def adjacency_polynomial(a: np.ndarray, spec: PolynomialSpec) -> np.ndarray:
    """Evaluate ``P(A)`` by repeated multiplication."""
    w = spec.coefficients(a.shape[0])
    power = a.copy()
    out = w[0] * power
    for coef in w[1:]:
        power = power @ a
        out = out + coef * power
    return out


def polynomial_distance(g: AlignedGraph, h: AlignedGraph, spec: PolynomialSpec = PolynomialSpec()) -> float:
    """``||P(A_g) - P(A_h)||_F / N**2``."""
    check_aligned(g, h)
    n = g.n
    diff = adjacency_polynomial(np.asarray(g.weights), spec) - adjacency_polynomial(np.asarray(h.weights), spec)
    return float(np.linalg.norm(diff) / n**2)


# -- betweenness -------------------------------------------------------------


def _neighbours(w: np.ndarray):
    return [np.flatnonzero(row) for row in w]


def betweenness_centrality(g: AlignedGraph, lengths: str = "auto", normalized: bool = False) -> np.ndarray:
    """Shortest-path betweenness by Brandes' dependency accumulation.

    Parameters
    ----------
    lengths : {"auto", "unit", "inverse"}
        Edge lengths: ``"unit"`` counts hops, ``"inverse"`` uses
        ``1 / weight``. ``"auto"`` picks unit lengths for binary graphs and
        inverse weights otherwise.
    normalized : bool
        Divide by ``(N-1)(N-2)/2``.

    Each unordered pair of endpoints is counted once; disconnected pairs
    contribute nothing.
    """
    w = np.asarray(g.weights)
    n = g.n
    if lengths == "auto":
        lengths = "unit" if g.is_binary() else "inverse"
    if lengths not in ("unit", "inverse"):
        raise ValueError(f"unknown lengths {lengths!r}")
    nbrs = _neighbours(w)
    cb = np.zeros(n)
    for s in range(n):
        if lengths == "unit":
            order, preds, sigma = _bfs(nbrs, s, n)
        else:
            order, preds, sigma = _dijkstra(w, nbrs, s, n)
        delta = np.zeros(n)
        for v in reversed(order):
            for u in preds[v]:
                delta[u] += sigma[u] / sigma[v] * (1.0 + delta[v])
            if v != s:
                cb[v] += delta[v]
    cb /= 2.0
    if normalized and n > 2:
        cb /= (n - 1) * (n - 2) / 2.0
    return cb


def _bfs(nbrs, s, n):
    dist = np.full(n, -1)
    sigma = np.zeros(n)
    preds = [[] for _ in range(n)]
    dist[s] = 0
    sigma[s] = 1.0
    order = []
    queue = deque([s])
    while queue:
        v = queue.popleft()
        order.append(v)
        for u in nbrs[v]:
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                queue.append(u)
            if dist[u] == dist[v] + 1:
                sigma[u] += sigma[v]
                preds[u].append(v)
    return order, preds, sigma


def _dijkstra(w, nbrs, s, n, rtol=1e-12):
    dist = np.full(n, np.inf)
    sigma = np.zeros(n)
    preds = [[] for _ in range(n)]
    done = np.zeros(n, dtype=bool)
    dist[s] = 0.0
    sigma[s] = 1.0
    order = []
    heap = [(0.0, s)]
    while heap:
        d, v = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        order.append(v)
        for u in nbrs[v]:
            if done[u]:
                continue
            nd = d + 1.0 / w[v, u]
            tol = rtol * max(nd, 1.0)
            if nd < dist[u] - tol:
                dist[u] = nd
                sigma[u] = sigma[v]
                preds[u] = [v]
                heapq.heappush(heap, (nd, u))
            elif abs(nd - dist[u]) <= tol:
                sigma[u] += sigma[v]
                preds[u].append(v)
    return order, preds, sigma


def centrality_distance(g: AlignedGraph, h: AlignedGraph, p: float = 2.0, lengths: str = "auto") -> float:
    """``(sum_i |c_i(h) - c_i(g)|**p)**(1/p)`` on betweenness centralities."""
    check_aligned(g, h)
    if p < 1:
        raise ValueError("p must be >= 1")
    diff = np.abs(betweenness_centrality(h, lengths) - betweenness_centrality(g, lengths))
    if math.isinf(p):
        return float(diff.max(initial=0.0))
    return float(np.sum(diff**p) ** (1.0 / p))


# -- heat wavelets -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HeatSignature:
    """Per-node heat-wavelet signatures.

    ``coefficients[a]`` is the concatenation over ``scales`` of column ``a``
    of ``exp(-tau L)``, so the array has shape ``(N, N * len(scales))``.
    """

    node_ids: tuple
    scales: tuple
    coefficients: np.ndarray

    def block(self, k: int) -> np.ndarray:
        """Kernel matrix ``exp(-scales[k] L)``."""
        n = len(self.node_ids)
        return self.coefficients[:, k * n : (k + 1) * n]


def _check_scales(scales) -> tuple:
    if np.isscalar(scales):
        scales = (scales,)
    scales = tuple(float(s) for s in scales)
    if not scales:
        raise ValueError("at least one scale is required")
    if any(s < 0 for s in scales):
        raise ValueError("scales must be non-negative")
    if any(b < a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be ascending")
    return scales


def chebyshev_heat_coefficients(tau: float, bound: float, order: int) -> np.ndarray:
    """Chebyshev coefficients of ``exp(-tau x)`` on ``[0, bound]``.

    With ``x = bound (y + 1) / 2`` and ``c = tau * bound / 2``,
    ``exp(-tau x) = e^{-c} [I_0(c) + 2 sum_k (-1)^k I_k(c) T_k(y)]``.
    """
    c = tau * bound / 2.0
    k = np.arange(order + 1)
    coef = 2.0 * ive(k, c) * (-1.0) ** k
    coef[0] /= 2.0
    return coef


def chebyshev_substeps(tau: float, bound: float, order: int, tol: float = 1e-11) -> int:
    """Smallest number of sub-steps ``s`` with a truncation tail below ``tol``.

    ``exp(-tau L)`` is applied as ``s`` successive applications of the
    order-``order`` expansion of ``exp(-(tau/s) L)``.
    """
    c = tau * bound / 2.0
    tail_k = np.arange(order + 1, order + 400)
    s = 1
    while s < 100000:
        if 2.0 * ive(tail_k, c / s).sum() * s < tol:
            return s
        s = max(s + 1, int(s * 1.25))
    return s


def _chebyshev_apply(lap, x, tau, bound, order):
    n = lap.shape[0]
    if bound <= 0 or tau == 0:
        return x.copy()
    s = chebyshev_substeps(tau, bound, order)
    coef = chebyshev_heat_coefficients(tau / s, bound, order)
    eye = sp.identity(n, format="csr") if sp.issparse(lap) else np.eye(n)
    shifted = (2.0 / bound) * lap - eye
    out = x
    for _ in range(s):
        t_prev = out
        t_cur = shifted @ out
        acc = coef[0] * t_prev + coef[1] * t_cur
        for ck in coef[2:]:
            t_prev, t_cur = t_cur, 2.0 * (shifted @ t_cur) - t_prev
            acc = acc + ck * t_cur
        out = acc
    return out


def heat_kernels(g: AlignedGraph, scales, method: str = "exact", order: int = DEFAULT_CHEBYSHEV_ORDER):
    """List of ``exp(-tau L)`` matrices, one per scale."""
    scales = _check_scales(scales)
    if method == "exact":
        spec = spectrum(g, Representation.LAPLACIAN, want_vectors=True)
        u, lam = spec.eigenvectors, spec.eigenvalues
        return [(u * np.exp(-tau * lam)) @ u.T for tau in scales]
    if method == "chebyshev":
        if order < 1:
            raise ValueError("order must be >= 1")
        lap = laplacian(g)
        if np.count_nonzero(lap) < 0.1 * lap.size:
            lap = sp.csr_matrix(lap)
        bound = laplacian_upper_bound(g)
        eye = np.eye(g.n)
        return [_chebyshev_apply(lap, eye, tau, bound, order) for tau in scales]
    raise ValueError(f"unknown method {method!r}")


def heat_signature(
    g: AlignedGraph, scales=(DEFAULT_TAU,), method: str = "exact", order: int = DEFAULT_CHEBYSHEV_ORDER
) -> HeatSignature:
    """Multiscale heat-wavelet signatures of every node of ``g``.

    ``method="chebyshev"`` expands ``exp(-tau x)`` on ``[0, 2 max degree]`` to
    the given order and applies it with sparse products; large
    ``tau * max degree`` is split into sub-steps so the truncation error stays
    near machine precision.
    """
    scales = _check_scales(scales)
    kernels = heat_kernels(g, scales, method, order)
    coeffs = np.hstack(kernels) if g.n else np.zeros((0, 0))
    coeffs.setflags(write=False)
    return HeatSignature(g.node_ids, scales, coeffs)


def node_drifts(
    g: AlignedGraph, h: AlignedGraph, scales=(DEFAULT_TAU,), method: str = "exact", order: int = DEFAULT_CHEBYSHEV_ORDER
) -> np.ndarray:
    """Per-node L2 drift ``||r_a(g) - r_a(h)||`` of the signatures."""
    check_aligned(g, h)
    sg = heat_signature(g, scales, method, order).coefficients
    sh = heat_signature(h, scales, method, order).coefficients
    return np.linalg.norm(sg - sh, axis=1)


def heat_distance(
    g: AlignedGraph, h: AlignedGraph, scales=(DEFAULT_TAU,), method: str = "exact", order: int = DEFAULT_CHEBYSHEV_ORDER
) -> float:
    """Mean over nodes of the L2 signature drift."""
    drifts = node_drifts(g, h, scales, method, order)
    return float(drifts.mean()) if len(drifts) else 0.0


def heat_trace_distance(
    g: AlignedGraph, h: AlignedGraph, scales=(DEFAULT_TAU,), method: str = "exact", order: int = DEFAULT_CHEBYSHEV_ORDER
) -> float:
    """``Tr[D^T D] / N``: mean over nodes of the *squared* signature drift."""
    drifts = node_drifts(g, h, scales, method, order)
    return float((drifts**2).mean()) if len(drifts) else 0.0


def top_changed_nodes(
    g: AlignedGraph,
    h: AlignedGraph,
    scales=MULTISCALE_TAUS,
    k: int = 10,
    method: str = "exact",
    order: int = DEFAULT_CHEBYSHEV_ORDER,
):
    """The ``k`` nodes with the largest signature drift, largest first.

    Ties keep node order. Returns ``[(node_id, drift), ...]``.
    """
    if not 0 <= k <= g.n:
        raise ValueError("k must be between 0 and N")
    drifts = node_drifts(g, h, scales, method, order)
    order_idx = sorted(range(g.n), key=lambda a: (-drifts[a], a))[:k]
    return [(g.node_ids[a], float(drifts[a])) for a in order_idx]
