"""Landscape feature toolkit for continuous single-objective black-box problems.

Computes 17 sets of numerical landscape features (~343 values) from a small
sample of evaluated points, plus plot-data builders, a batch CLI and an HTTP
service.
"""

from lkit.core import (
    CellGrid,
    FeatureObject,
    SampleSpec,
    create_feature_object,
    create_initial_sample,
    summarize,
)
from lkit.registry import (
    calculate_feature_set,
    calculate_features,
    feature_set_ids,
    list_feature_sets,
)

__all__ = [
    "CellGrid",
    "FeatureObject",
    "SampleSpec",
    "create_feature_object",
    "create_initial_sample",
    "summarize",
    "calculate_feature_set",
    "calculate_features",
    "feature_set_ids",
    "list_feature_sets",
]

__version__ = "0.1.0"
