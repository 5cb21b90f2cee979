"""Small input-validation helpers shared across modules."""

from __future__ import annotations

import numpy as np


def check_feature_matrix(X, name: str = "matrix", min_rows: int = 1) -> np.ndarray:
    """Coerce to a finite 2-D float array with at least ``min_rows`` rows."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {X.shape}")
    if X.shape[0] < min_rows:
        raise ValueError(f"{name} needs at least {min_rows} row(s), got {X.shape[0]}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def check_matching_columns(X_a: np.ndarray, X_b: np.ndarray):
    if X_a.shape[1] != X_b.shape[1]:
        raise ValueError(
            f"matrices must share their feature columns, got {X_a.shape[1]} and {X_b.shape[1]}")
