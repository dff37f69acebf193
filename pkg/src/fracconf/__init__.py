"""Counting and measuring point configurations in fractal point clouds."""

from .errors import *  # noqa: F401,F403
from .geometry import (DOT_PRODUCT, EUCLIDEAN, GapGraph, Metric, PointCloud, ScaleSequence,
                       edge_length_vector, eval_phi, external_metric)
from .metrics import LINEAR, ParaboloidBody, get_metric, paraboloid_metric, phong_stein_audit
from .counting import (brute_force_count, count_gap_graph, count_pinned, edge_length_cloud,
                       pinned_counts)
from .dimension import box_count, box_dimension, fit_exponent, regularity_audit
from .experiment import PRESETS, run_experiment

__version__ = "0.1.0"
