"""Regime change in a stochastic block model time series.

A calm SBM series switches to heavy rewiring between t=6 and t=13 and then
calms down again. For each metric we print the consecutive-step distances
and the two block ratios; values well above 1 mean the middle block stands
apart from its neighbours.

    python3 demos/change_point.py [seed]
"""

import sys

import numpy as np

from graphdist import distance_matrix
from graphdist.synth import ChangePointSpec, change_point_series, gen_sbm, regime_ratios

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
spec = ChangePointSpec(seed=seed)
series = change_point_series(gen_sbm(seed=seed), spec)
print(f"{len(series)} graphs, blocks {series.blocks}")

for metric in ("hamming", "jaccard", "polynomial", "st", "heat"):
    d = distance_matrix(series.graphs, metric)
    steps = np.diag(d.values, 1)
    r1, r2 = regime_ratios(d, series.blocks)
    curve = " ".join(f"{x:.3g}" for x in steps)
    print(f"\n{metric}: r1={r1:.3f} r2={r2:.3f}")
    print(f"  consecutive: {curve}")
