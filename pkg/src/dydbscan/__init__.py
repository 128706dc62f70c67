"""Fully dynamic DBSCAN over LSH buckets and an Euler tour spanning forest."""

from .baselines import (
    NOISE,
    FixedCoreModel,
    StaticClustering,
    fixed_core_assign,
    naive_dbscan,
    static_hash_clustering,
)
from .core import Config, DynamicDBSCAN, Snapshot
from .errors import InputError, InvariantError, UsageError
from .evalkit import LabeledDataset, ari, generate_blobs, hausdorff, nmi, standardize
from .forest import BACKEND, EulerTourForest, available_backends, make_forest
from .lsh import HashFunction, LSHIndex, compute_key, draw_hash_functions

__all__ = [
    "BACKEND",
    "NOISE",
    "Config",
    "DynamicDBSCAN",
    "EulerTourForest",
    "FixedCoreModel",
    "HashFunction",
    "InputError",
    "InvariantError",
    "LSHIndex",
    "LabeledDataset",
    "Snapshot",
    "StaticClustering",
    "UsageError",
    "ari",
    "available_backends",
    "compute_key",
    "draw_hash_functions",
    "fixed_core_assign",
    "generate_blobs",
    "hausdorff",
    "make_forest",
    "naive_dbscan",
    "nmi",
    "standardize",
    "static_hash_clustering",
]
