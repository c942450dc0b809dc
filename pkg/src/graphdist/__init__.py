"""Distances between aligned graphs and the analysis of graph datasets.

Submodules
----------
graph       aligned graph type, Laplacians, spectra
structural  Hamming and Jaccard distances
spectral    spectral distances, spanning trees, Ipsen-Mikhailov, HIM
mesoscale   polynomial, betweenness and heat-wavelet distances
ingest      graphs from abundance tables and item-set corpora
analysis    distance matrices, permutation tests, MDS, clustering
synth       generators and perturbation dynamics
metrics     name -> distance registry
io, cli     file formats and the ``graphdist`` command
"""

from .analysis import DistanceMatrix, TestReport, distance_matrix
from .graph import AlignedGraph, Representation, from_adjacency, from_edge_list
from .metrics import REGISTRY, get_metric

__version__ = "0.1.0"

__all__ = [
    "AlignedGraph",
    "DistanceMatrix",
    "REGISTRY",
    "Representation",
    "TestReport",
    "distance_matrix",
    "from_adjacency",
    "from_edge_list",
    "get_metric",
]
