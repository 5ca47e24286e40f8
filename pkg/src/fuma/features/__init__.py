from fuma.features.compute import FeatureVector, compute_features
from fuma.features.registry import (
    FEATURE_NAMES,
    FEATURES,
    N_FEATURES,
    REGISTRY_VERSION,
    FeatureSpec,
    index_of,
    registry_hash,
    registry_table,
    validate_vector,
)
from fuma.features.stl import Decomposition, decompose

__all__ = [
    "FeatureVector",
    "compute_features",
    "FEATURE_NAMES",
    "FEATURES",
    "N_FEATURES",
    "REGISTRY_VERSION",
    "FeatureSpec",
    "index_of",
    "registry_hash",
    "registry_table",
    "validate_vector",
    "Decomposition",
    "decompose",
]
