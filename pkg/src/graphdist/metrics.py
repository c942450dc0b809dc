"""Named registry of pairwise graph distances.

Each entry maps a name to a callable ``f(g, h, **params) -> float`` plus the
parameter names it accepts. The registry backs
:func:`graphdist.analysis.distance_matrix` and the ``dist`` CLI command.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import mesoscale, spectral, structural
from .graph import Representation


class UnknownMetric(KeyError):
    pass


@dataclass(frozen=True)
class Metric:
    name: str
    func: Callable
    params: tuple = ()

    def __call__(self, g, h, **params):
        unknown = set(params) - set(self.params)
        if unknown:
            raise TypeError(f"metric {self.name!r} does not accept {sorted(unknown)}")
        return float(self.func(g, h, **params))


def _lp_spectral(g, h, representation="laplacian", alpha=None, p=2.0):
    filt = spectral.SpectralFilter.identity() if alpha is None else spectral.SpectralFilter.low_pass(alpha)
    return spectral.lp_spectral_distance(g, h, Representation(representation), filt, p)


def _gaussian_density(g, h, sigma=1.0, representation="laplacian"):
    return spectral.gaussian_density_l1(g, h, sigma, Representation(representation))


def _polynomial(g, h, K=3, alpha=0.9):
    return mesoscale.polynomial_distance(g, h, mesoscale.PolynomialSpec(int(K), float(alpha)))


def _heat(g, h, tau=(mesoscale.DEFAULT_TAU,), method="exact", order=mesoscale.DEFAULT_CHEBYSHEV_ORDER):
    return mesoscale.heat_distance(g, h, tau, method, int(order))


REGISTRY = {
    m.name: m
    for m in [
        Metric("hamming", structural.hamming),
        Metric("jaccard", structural.jaccard_binary),
        Metric("jaccard_weighted", structural.jaccard_weighted),
        Metric("lp_spectral", _lp_spectral, ("representation", "alpha", "p")),
        Metric("st", spectral.st_dissimilarity, ("generalized",)),
        Metric("gaussian_density", _gaussian_density, ("sigma", "representation")),
        Metric("im", spectral.im_distance, ("gamma", "method")),
        Metric("him", spectral.him_distance, ("xi", "gamma", "method")),
        Metric("polynomial", _polynomial, ("K", "alpha")),
        Metric("centrality", mesoscale.centrality_distance, ("p", "lengths")),
        Metric("heat", _heat, ("tau", "method", "order")),
    ]
}


def get_metric(name: str) -> Metric:
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnknownMetric(f"unknown metric {name!r}; choose from {sorted(REGISTRY)}") from None
