"""Multi-manifold clustering by largest-angle path distances.

Builds local d-simplices over a point cloud, weights adjacent simplices by
their dihedral angles, and clusters with the minimax (largest-angle) path
metric: denoising by kappa-NN distances, cluster-count estimation by
persistence across scales, and label recovery by majority vote.
"""

__version__ = "0.1.0"

from .core import (Params, ParameterError, PipelineError, PointCloud,
                   params_from_config, params_to_config, resolve_params)
from .datasets import ShapeSpec, generate, load_csv, save_csv
from .dendrogram import MergeDendrogram, build_dendrogram
from .evaluate import GapReport, accuracy, gap_report
from .pipeline import ClusterResult, run

__all__ = [
    "Params", "ParameterError", "PipelineError", "PointCloud",
    "params_from_config", "params_to_config", "resolve_params",
    "ShapeSpec", "generate", "load_csv", "save_csv",
    "MergeDendrogram", "build_dendrogram",
    "GapReport", "accuracy", "gap_report",
    "ClusterResult", "run",
    "__version__",
]
