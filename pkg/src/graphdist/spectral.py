"""Eigenvalue-based dissimilarities.

All quantities here depend on the graphs only through their spectra and are
therefore invariant to node relabeling (and blind to isospectral pairs).

Ipsen-Mikhailov densities use the combinatorial Laplacian: the vibrational
frequencies are ``omega_i = sqrt(lambda_i)`` for ``i = 1 .. N-1`` and each
graph's density

    rho(w) = K * sum_i gamma / (gamma**2 + (w - omega_i)**2)

is normalized to unit mass on ``[0, inf)``.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from .errors import (
    BinarizedWarning,
    Disconnected,
    GeneralizedResultWarning,
    InvalidGraph,
    NoRoot,
    QuadratureNonConvergence,
)
from .graph import AlignedGraph, Representation, check_aligned, spectrum
from .structural import hamming


@dataclass(frozen=True)
class SpectralFilter:
    """Function applied to eigenvalues before comparing them.

    Use the constructors :meth:`identity`, :meth:`low_pass` and :meth:`custom`.
    """

    kind: str = "identity"
    alpha: float = 0.0
    func: Optional[Callable] = None
    name: str = "identity"

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def low_pass(cls, alpha: float):
        """``f(x) = exp(-alpha * x)``."""
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        return cls("low_pass", float(alpha), None, f"low_pass({alpha:g})")

    @classmethod
    def custom(cls, name: str, func: Callable):
        return cls("custom", 0.0, func, name)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "identity":
            return x
        if self.kind == "low_pass":
            return np.exp(-self.alpha * x)
        out = np.asarray(self.func(x), dtype=float)
        if not np.all(np.isfinite(out)):
            raise ValueError(f"filter {self.name!r} is not finite on the spectrum")
        return out


def lp_spectral_distance(
    g: AlignedGraph,
    h: AlignedGraph,
    representation=Representation.LAPLACIAN,
    filter: Optional[SpectralFilter] = None,
    p: float = 2.0,
) -> float:
    """``(sum_i |f(mu_i) - f(lambda_i)|**p) ** (1/p)`` over sorted spectra.

    Eigenvalues are paired by ascending index. ``p = inf`` gives the max.
    """
    if g.n != h.n:
        check_aligned(g, h)
    if p < 1:
        raise ValueError("p must be >= 1")
    f = filter or SpectralFilter.identity()
    lg = spectrum(g, representation).eigenvalues
    lh = spectrum(h, representation).eigenvalues
    diff = np.abs(f(lh) - f(lg))
    if math.isinf(p):
        return float(diff.max(initial=0.0))
    return float(np.sum(diff**p) ** (1.0 / p))


# -- spanning trees ----------------------------------------------------------


def spanning_tree_log_count(g: AlignedGraph, generalized: bool = False) -> float:
    """Log of the (weighted) number of spanning trees via the Matrix-Tree theorem.

    ``log T = sum_{i>=1} log(lambda_i) - log(N)``. A disconnected graph raises
    :class:`Disconnected`; with ``generalized=True`` the product runs over the
    non-zero eigenvalues instead and a :class:`GeneralizedResultWarning` is
    emitted.
    """
    n = g.n
    if n == 0:
        raise InvalidGraph("empty node set")
    lam = spectrum(g, Representation.LAPLACIAN).eigenvalues
    if n == 1:
        return 0.0
    if lam[1] <= 0:
        if not generalized:
            raise Disconnected("graph is disconnected (lambda_1 = 0)")
        warnings.warn(
            "disconnected graph: spanning-tree count uses the pseudo-determinant",
            GeneralizedResultWarning,
            stacklevel=2,
        )
        nz = lam[lam > 0]
        return float(np.sum(np.log(nz)) - math.log(n))
    return float(np.sum(np.log(lam[1:])) - math.log(n))


def st_dissimilarity(g: AlignedGraph, h: AlignedGraph, generalized: bool = False) -> float:
    """``|log T_g - log T_h|``, the spanning-tree log-dissimilarity."""
    check_aligned(g, h)
    out = []
    for name, graph in (("g", g), ("h", h)):
        try:
            out.append(spanning_tree_log_count(graph, generalized=generalized))
        except Disconnected as exc:
            raise Disconnected(f"argument {name!r} is disconnected", which=name) from exc
    return abs(out[0] - out[1])


# -- Gaussian spectral densities ---------------------------------------------


def gaussian_spectral_density(eigenvalues, sigma: float, x):
    """Equal-weight mixture of Gaussians centred on the eigenvalues."""
    lam = np.asarray(eigenvalues, dtype=float)
    x = np.asarray(x, dtype=float)
    z = (x[None, :] - lam[:, None]) / sigma
    return np.exp(-0.5 * z**2).sum(axis=0) / (len(lam) * sigma * math.sqrt(2 * math.pi))


def gaussian_density_l1_from_spectra(lg, lh, sigma: float = 1.0, step: Optional[float] = None) -> float:
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    step = sigma / 20.0 if step is None else step
    both = np.concatenate([np.asarray(lg, float), np.asarray(lh, float)])
    lo = both.min() - 5 * sigma
    hi = both.max() + 5 * sigma
    n_pts = int(math.ceil((hi - lo) / step)) + 1
    x = np.linspace(lo, hi, n_pts)
    diff = np.abs(gaussian_spectral_density(lg, sigma, x) - gaussian_spectral_density(lh, sigma, x))
    return float(integrate.trapezoid(diff, x))


def gaussian_density_l1(
    g: AlignedGraph, h: AlignedGraph, sigma: float = 1.0, representation=Representation.LAPLACIAN
) -> float:
    """L1 distance between Gaussian-smoothed eigenvalue densities.

    Trapezoid rule on ``[min - 5 sigma, max + 5 sigma]`` with step ``sigma/20``.
    The result lies in ``[0, 2]``.
    """
    if g.n != h.n:
        check_aligned(g, h)
    lg = spectrum(g, representation).eigenvalues
    lh = spectrum(h, representation).eigenvalues
    return gaussian_density_l1_from_spectra(lg, lh, sigma)


# -- Ipsen-Mikhailov ---------------------------------------------------------


def im_normalization(frequencies, gamma: float, counts=None) -> float:
    """``K = 1 / sum_i (pi/2 + arctan(omega_i / gamma))``."""
    w = np.asarray(frequencies, dtype=float)
    c = np.ones_like(w) if counts is None else np.asarray(counts, dtype=float)
    return 1.0 / float(np.sum(c * (math.pi / 2 + np.arctan(w / gamma))))


@dataclass(frozen=True, eq=False)
class LorentzianDensity:
    """Normalized sum of Lorentzians centred on vibrational frequencies.

    ``frequencies`` holds the distinct centres and ``counts`` their
    multiplicities, so closed-form spectra stay cheap to evaluate.
    """

    frequencies: np.ndarray
    counts: np.ndarray
    gamma: float
    K: float

    @classmethod
    def from_frequencies(cls, frequencies, gamma: float) -> "LorentzianDensity":
        if not gamma > 0:
            raise ValueError("gamma must be positive")
        w, c = np.unique(np.asarray(frequencies, dtype=float), return_counts=True)
        return cls(w, c.astype(float), float(gamma), im_normalization(w, gamma, c))

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        g = self.gamma
        terms = g / (g * g + (omega[..., None] - self.frequencies) ** 2)
        return self.K * (terms * self.counts).sum(axis=-1)

    def total_mass(self) -> float:
        upper = float(self.frequencies.max(initial=0.0)) + 20 * self.gamma
        head = integrate.quad(self, 0.0, upper, limit=500, epsabs=1e-12, epsrel=1e-12)[0]
        tail = integrate.quad(self, upper, np.inf, limit=500, epsabs=1e-12, epsrel=1e-12)[0]
        return head + tail


def laplacian_frequencies(g: AlignedGraph) -> np.ndarray:
    """``sqrt(lambda_i)`` for ``i >= 1`` of the combinatorial Laplacian."""
    lam = spectrum(g, Representation.LAPLACIAN).eigenvalues
    return np.sqrt(lam[1:])


def lorentzian_density(g: AlignedGraph, gamma: float) -> LorentzianDensity:
    return LorentzianDensity.from_frequencies(laplacian_frequencies(g), gamma)


def lorentzian_overlap(a, b, gamma: float) -> np.ndarray:
    """Matrix of ``int_0^inf L_a(w) L_b(w) dw`` for ``L_x(w) = gamma / (gamma^2 + (w - x)^2)``.

    Partial fractions over the poles ``x +- i gamma``; the same-half-plane term
    is evaluated through ``log1p(u) / u`` so near-coincident centres keep
    full precision.
    """
    a = np.asarray(a, dtype=float)[:, None]
    b = np.asarray(b, dtype=float)[None, :]
    za = a + 1j * gamma
    zb = b + 1j * gamma
    u = -(za - zb) / za
    small = np.abs(u) < 1e-3
    u_safe = np.where(small, 1.0, u)
    series = 1 - u / 2 + u**2 / 3 - u**3 / 4 + u**4 / 5
    ratio = np.where(small, series, np.log1p(u_safe) / u_safe)
    same = -ratio / za
    zbc = b - 1j * gamma
    cross = (np.log(-zbc) - np.log(-za)) / (za - zbc)
    return -0.5 * (same - cross).real


def _squared_distance_closed(da: LorentzianDensity, db: LorentzianDensity) -> float:
    g = da.gamma

    def block(x, y):
        m = lorentzian_overlap(x.frequencies, y.frequencies, g)
        return float(x.counts @ m @ y.counts) * x.K * y.K

    return block(da, da) + block(db, db) - 2.0 * block(da, db)


def _squared_distance_quad(da: LorentzianDensity, db: LorentzianDensity):
    g = da.gamma
    fa = np.concatenate([da.frequencies, db.frequencies])
    upper = float(fa.max(initial=0.0)) + 20 * g

    def integrand(w):
        return (da(w) - db(w)) ** 2

    pts = np.unique(fa[(fa > 0) & (fa < upper)])
    # near-duplicate centres (eigenvalue noise) would create degenerate subintervals
    if len(pts):
        pts = pts[np.concatenate(([True], np.diff(pts) > 0.1 * g))]
    if len(pts) > 50:
        pts = pts[np.linspace(0, len(pts) - 1, 50).astype(int)]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        head = integrate.quad(
            integrand, 0.0, upper, points=pts if len(pts) else None, limit=1000, epsabs=1e-12, epsrel=1e-10
        )[0]
        tail = integrate.quad(integrand, upper, np.inf, limit=500, epsabs=1e-12, epsrel=1e-10)[0]
    notes = "; ".join(str(w.message).split("\n")[0] for w in caught if issubclass(w.category, integrate.IntegrationWarning))
    return head + tail, notes


def im_distance_from_frequencies(
    freq_a, freq_b, gamma: float, method: str = "quad", counts_a=None, counts_b=None
) -> float:
    """IM distance between two frequency sets (see :func:`im_distance`)."""
    if counts_a is None:
        da = LorentzianDensity.from_frequencies(freq_a, gamma)
    else:
        da = LorentzianDensity(np.asarray(freq_a, float), np.asarray(counts_a, float), gamma,
                               im_normalization(freq_a, gamma, counts_a))
    if counts_b is None:
        db = LorentzianDensity.from_frequencies(freq_b, gamma)
    else:
        db = LorentzianDensity(np.asarray(freq_b, float), np.asarray(counts_b, float), gamma,
                               im_normalization(freq_b, gamma, counts_b))
    closed = max(_squared_distance_closed(da, db), 0.0)
    if method == "closed":
        return math.sqrt(closed)
    if method != "quad":
        raise ValueError(f"unknown method {method!r}")
    quad, notes = _squared_distance_quad(da, db)
    quad = max(quad, 0.0)
    # quadpack warnings alone are not fatal; disagreement with the closed form is
    if abs(quad - closed) > 1e-9 + 1e-6 * closed:
        raise QuadratureNonConvergence(
            f"quadrature ({quad:.3e}) disagrees with the closed form ({closed:.3e})" + (f": {notes}" if notes else "")
        )
    return math.sqrt(quad)


_GAMMA_CACHE: dict = {}
_GAMMA_LOCK = threading.Lock()


def _empty_complete_distance(n: int, gamma: float) -> float:
    # empty: N-1 frequencies at 0; complete: N-1 frequencies at sqrt(N)
    return im_distance_from_frequencies(
        [0.0], [math.sqrt(n)], gamma, method="closed", counts_a=[n - 1], counts_b=[n - 1]
    )


def im_calibrate_gamma(n: int, lo: float = 1e-4, hi: float = 10.0) -> float:
    """Scale ``gamma`` at which the empty and complete graphs on ``n`` nodes are at distance 1.

    Root-finding on ``[lo, hi]``; results are cached per ``n``.
    """
    n = int(n)
    if n < 2:
        raise ValueError("n must be >= 2")
    key = (n, lo, hi)
    cached = _GAMMA_CACHE.get(key)
    if cached is not None:
        return cached

    def f(gamma):
        return _empty_complete_distance(n, gamma) - 1.0

    f_lo, f_hi = f(lo), f(hi)
    if f_lo * f_hi > 0:
        raise NoRoot(f"no calibration root in [{lo}, {hi}] for n={n} (f={f_lo:.3g}, {f_hi:.3g})")
    gamma = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    with _GAMMA_LOCK:
        _GAMMA_CACHE.setdefault(key, gamma)
    return _GAMMA_CACHE[key]


def im_distance(g: AlignedGraph, h: AlignedGraph, gamma: Optional[float] = None, method: str = "quad") -> float:
    """Ipsen-Mikhailov distance: L2 distance of Lorentzian frequency densities.

    Parameters
    ----------
    g, h : AlignedGraph
        Graphs of equal size.
    gamma : float, optional
        Lorentzian half-width. Defaults to :func:`im_calibrate_gamma` of N.
    method : {"quad", "closed"}
        ``"quad"`` integrates ``(rho_g - rho_h)**2`` adaptively on
        ``[0, inf)`` and verifies the result against the closed form,
        raising :class:`QuadratureNonConvergence` on disagreement.
        ``"closed"`` returns the closed form alone.
    """
    if g.n != h.n:
        check_aligned(g, h)
    if gamma is None:
        gamma = im_calibrate_gamma(g.n)
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return im_distance_from_frequencies(laplacian_frequencies(g), laplacian_frequencies(h), gamma, method)


def him_distance(
    g: AlignedGraph, h: AlignedGraph, xi: float = 1.0, gamma: Optional[float] = None, method: str = "quad"
) -> float:
    """``sqrt(IM**2 + xi * H**2) / sqrt(1 + xi)`` on binary graphs.

    Weighted inputs are binarized (with a :class:`BinarizedWarning`).
    """
    check_aligned(g, h)
    if not xi > 0:
        raise ValueError("xi must be positive")
    if not (g.is_binary() and h.is_binary()):
        warnings.warn("him_distance binarizes weighted graphs", BinarizedWarning, stacklevel=2)
        g, h = g.binarized(), h.binarized()
    im = im_distance(g, h, gamma=gamma, method=method)
    ham = hamming(g, h)
    return math.sqrt(im * im + xi * ham * ham) / math.sqrt(1.0 + xi)
