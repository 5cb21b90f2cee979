"""Contrastive PCA: directions of high target variance and low background variance.

The projection solves an eigenproblem on ``C_T - alpha * (C_B + eps*I)``.
``alpha`` may be fixed, or selected automatically by an iterative trace-ratio
maximization that alternates between updating ``alpha`` (the current ratio)
and the eigenvector block at that ``alpha``; the ratio increases monotonically
and typically settles within a few iterations.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .validation import check_feature_matrix, check_matching_columns


@dataclass
class StandardizationParams:
    """Column means/stds used to scale the target and background matrices."""

    mode: str
    target_mean: np.ndarray
    target_std: np.ndarray
    background_mean: np.ndarray
    background_std: np.ndarray
    zero_variance_target: np.ndarray
    zero_variance_background: np.ndarray

    def apply(self, X: np.ndarray, side: str = "target") -> np.ndarray:
        if side == "target":
            mean, std = self.target_mean, self.target_std
        elif side == "background":
            mean, std = self.background_mean, self.background_std
        else:
            raise ValueError(f"side must be 'target' or 'background', got {side!r}")
        safe = np.where(std > 0, std, 1.0)
        return (np.asarray(X, dtype=np.float64) - mean) / safe


def standardize(X_target, X_background, mode: str = "separate"):
    """Center and scale both matrices to zero mean and unit sample variance.

    ``separate`` scales each matrix by its own column statistics;
    ``concatenated`` derives one set of statistics from the stacked matrix.
    Zero-variance columns map to all zeros and are flagged on the returned
    parameters.
    """
    X_t = check_feature_matrix(X_target, "target matrix", min_rows=2)
    X_b = check_feature_matrix(X_background, "background matrix", min_rows=2)
    check_matching_columns(X_t, X_b)
    if mode == "separate":
        mean_t, std_t = X_t.mean(axis=0), X_t.std(axis=0, ddof=1)
        mean_b, std_b = X_b.mean(axis=0), X_b.std(axis=0, ddof=1)
    elif mode == "concatenated":
        stacked = np.vstack([X_t, X_b])
        mean_t = mean_b = stacked.mean(axis=0)
        std_t = std_b = stacked.std(axis=0, ddof=1)
    else:
        raise ValueError(f"mode must be 'separate' or 'concatenated', got {mode!r}")
    params = StandardizationParams(
        mode, mean_t, std_t, mean_b, std_b,
        np.flatnonzero(std_t == 0.0), np.flatnonzero(std_b == 0.0))
    return params.apply(X_t, "target"), params.apply(X_b, "background"), params


def top_eigenpairs(C: np.ndarray, k: int):
    """Top-``k`` eigenpairs of a symmetric matrix, by eigenvalue value.

    Returns ``(values, vectors)`` with values descending and orthonormal
    column vectors. Each vector is oriented so its largest-magnitude entry is
    positive; exact eigenvalue ties are ordered by the sign-fixed
    lexicographically smaller vector first.
    """
    C = np.asarray(C, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {C.shape}")
    d = C.shape[0]
    if not 1 <= k <= d:
        raise ValueError(f"k must be in [1, {d}], got {k}")
    scale = max(1.0, float(np.abs(C).max(initial=0.0)))
    if float(np.abs(C - C.T).max(initial=0.0)) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    C = (C + C.T) / 2.0
    values, vectors = np.linalg.eigh(C)
    # Orient each eigenvector: its largest-magnitude entry becomes positive.
    for j in range(d):
        pivot = int(np.argmax(np.abs(vectors[:, j])))
        if vectors[pivot, j] < 0:
            vectors[:, j] = -vectors[:, j]
    order = sorted(range(d), key=lambda j: (-values[j], tuple(vectors[:, j])))
    idx = order[:k]
    vals = values[idx]
    vecs = vectors[:, idx]
    residual = np.linalg.norm(C @ vecs - vecs * vals, axis=0)
    bound = 1e-8 * max(1.0, float(np.linalg.norm(C)))
    if np.any(residual > bound):
        raise ValueError(f"eigendecomposition residual {residual.max():.3e} exceeds {bound:.3e}")
    return vals, vecs


def project(X: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Project rows of ``X`` onto the columns of ``W``."""
    X, W = np.asarray(X, dtype=np.float64), np.asarray(W, dtype=np.float64)
    if X.shape[1] != W.shape[0]:
        raise ValueError(f"cannot project {X.shape} through {W.shape}: column counts disagree")
    return X @ W


@dataclass
class ContrastiveResult:
    """Projection, spectra, and embeddings from one contrastive fit."""

    W: np.ndarray                 # d x d' projection matrix
    eigenvalues: np.ndarray       # d' values, descending
    alpha: float
    alpha_history: list[float]
    epsilon: float
    Y_target: np.ndarray
    Y_background: np.ndarray
    converged: bool = True
    standardization: StandardizationParams | None = None


def _covariance(X: np.ndarray) -> np.ndarray:
    centered = X - X.mean(axis=0)
    return centered.T @ centered / (X.shape[0] - 1)


def contrastive_fit(X_target, X_background, alpha: float, n_components: int,
                    epsilon: float = 1e-3) -> ContrastiveResult:
    """Fit with a fixed contrast parameter on already-standardized matrices."""
    X_t = check_feature_matrix(X_target, "target matrix", min_rows=2)
    X_b = check_feature_matrix(X_background, "background matrix", min_rows=2)
    check_matching_columns(X_t, X_b)
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    C_t = _covariance(X_t)
    C_b = _covariance(X_b) + epsilon * np.eye(X_b.shape[1])
    values, W = top_eigenpairs(C_t - alpha * C_b, n_components)
    return ContrastiveResult(W, values, float(alpha), [float(alpha)], epsilon,
                             project(X_t, W), project(X_b, W))


def auto_contrast_fit(X_target, X_background, n_components: int, epsilon: float = 1e-3,
                      rel_tol: float = 1e-3, max_iter: int = 100) -> ContrastiveResult:
    """Select the contrast parameter by iterative trace-ratio maximization.

    Starting from the plain-PCA block of the target covariance, alternately
    set ``alpha`` to the current ratio tr(W'C_T W)/tr(W'(C_B+eps I)W) and
    refit ``W`` at that ``alpha``. Stops when two successive ``alpha`` values
    agree within ``rel_tol`` (relative for alpha > 1), or at ``max_iter`` with
    a warning, returning the best iterate so far.
    """
    X_t = check_feature_matrix(X_target, "target matrix", min_rows=2)
    X_b = check_feature_matrix(X_background, "background matrix", min_rows=2)
    check_matching_columns(X_t, X_b)
    C_t = _covariance(X_t)
    C_b = _covariance(X_b) + epsilon * np.eye(X_b.shape[1])
    _, W = top_eigenpairs(C_t, n_components)
    history: list[float] = []
    alpha_prev = None
    converged = False
    for _ in range(max_iter):
        alpha = float(np.trace(W.T @ C_t @ W) / np.trace(W.T @ C_b @ W))
        history.append(alpha)
        values, W = top_eigenpairs(C_t - alpha * C_b, n_components)
        if alpha_prev is not None and abs(alpha - alpha_prev) <= rel_tol * max(1.0, alpha_prev):
            converged = True
            break
        alpha_prev = alpha
    if not converged:
        warnings.warn(f"contrast-parameter iteration did not converge in {max_iter} steps; "
                      "returning the latest iterate")
    alpha = history[-1]
    return ContrastiveResult(W, values, alpha, history, epsilon,
                             project(X_t, W), project(X_b, W), converged)


class ContrastivePCA(BaseEstimator):
    """Contrastive PCA estimator over a target and a background feature matrix.

    Parameters
    ----------
    n_components : int
        Number of contrastive components to keep.
    alpha : "auto" or float >= 0
        Contrast parameter; "auto" selects it by trace-ratio maximization.
        0 reduces to plain PCA on the target matrix.
    epsilon : float
        Diagonal regularizer added to the background covariance.
    standardize_mode : {"separate", "concatenated"}
        How the two matrices are scaled before covariance estimation.
    """

    def __init__(self, n_components=2, alpha="auto", epsilon=1e-3,
                 standardize_mode="separate", rel_tol=1e-3, max_iter=100):
        self.n_components = n_components
        self.alpha = alpha
        self.epsilon = epsilon
        self.standardize_mode = standardize_mode
        self.rel_tol = rel_tol
        self.max_iter = max_iter

    def fit(self, X_target, X_background):
        """Learn the projection from the two matrices (rows = nodes, columns = features)."""
        if self.alpha != "auto" and (not np.isscalar(self.alpha) or self.alpha < 0):
            raise ValueError(f'alpha must be "auto" or a nonnegative number, got {self.alpha!r}')
        X_t = check_feature_matrix(X_target, "target matrix", min_rows=2)
        if self.n_components > X_t.shape[1]:
            raise ValueError(f"n_components={self.n_components} exceeds the "
                             f"{X_t.shape[1]} available features")
        X_ts, X_bs, scaler = standardize(X_target, X_background, self.standardize_mode)
        if self.alpha == "auto":
            result = auto_contrast_fit(X_ts, X_bs, self.n_components, self.epsilon,
                                       self.rel_tol, self.max_iter)
        else:
            result = contrastive_fit(X_ts, X_bs, float(self.alpha), self.n_components, self.epsilon)
        result.standardization = scaler
        self.scaler_ = scaler
        self.W_ = result.W
        self.eigenvalues_ = result.eigenvalues
        self.alpha_ = result.alpha
        self.alpha_history_ = result.alpha_history
        self.converged_ = result.converged
        self.embedding_target_ = result.Y_target
        self.embedding_background_ = result.Y_background
        self.n_features_in_ = X_ts.shape[1]
        self.result_ = result
        return self

    def transform(self, X, side: str = "target") -> np.ndarray:
        """Standardize ``X`` with the fitted scaler for ``side`` and project it."""
        if not hasattr(self, "W_"):
            raise ValueError("this estimator has not been fitted yet")
        return project(self.scaler_.apply(np.asarray(X, dtype=np.float64), side), self.W_)
