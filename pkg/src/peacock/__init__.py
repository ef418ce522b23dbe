# -*- coding: utf-8 -*-

__version__ = "0.1.0"


from .bundling import BundleWeightMatrix, DetectionParams, build_weight_matrix
from .coloring import ColorEmbedding, ColorTable, OptimizerConfig, normalize_colors, optimize, stress
from .dissimilarity import DissimilarityMatrix, build_dissimilarity_matrix
from .errors import PeacockError
from .model import EdgeCurve, GraphLayout, load_layout
from .pipeline import run_baseline, run_peacock

__all__ = [
    "BundleWeightMatrix",
    "ColorEmbedding",
    "ColorTable",
    "DetectionParams",
    "DissimilarityMatrix",
    "EdgeCurve",
    "GraphLayout",
    "OptimizerConfig",
    "PeacockError",
    "build_dissimilarity_matrix",
    "build_weight_matrix",
    "load_layout",
    "normalize_colors",
    "optimize",
    "run_baseline",
    "run_peacock",
    "stress",
]
