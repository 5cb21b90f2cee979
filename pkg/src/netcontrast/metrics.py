"""Contrast-quality scores for a pair of embeddings.

Three complementary measures of how strongly the target embedding differs
from the background: a per-row trace (dispersion) ratio, a Gaussian estimate
of the Bhattacharyya distance, and a nearest-neighbor estimate of the KL
divergence of the target distribution from the background one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .validation import check_feature_matrix, check_matching_columns


@dataclass
class MetricReport:
    dispersion_ratio: float
    bhattacharyya: float
    kl_divergence: float

    def as_dict(self) -> dict:
        return {
            "dispersion_ratio": self.dispersion_ratio,
            "bhattacharyya": self.bhattacharyya,
            "kl_divergence": self.kl_divergence,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


def dispersion_ratio(Y_target, Y_background) -> float:
    """Per-row trace ratio of the jointly standardized embeddings.

    Both inputs are rescaled with the column statistics of their
    concatenation, then compared as mean squared row norms. Identical inputs
    give exactly 1; swapping the arguments inverts the value.
    """
    Y_t = check_feature_matrix(Y_target, "target embedding")
    Y_b = check_feature_matrix(Y_background, "background embedding")
    check_matching_columns(Y_t, Y_b)
    stacked = np.vstack([Y_t, Y_b])
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0, ddof=1)
    safe = np.where(std > 0, std, 1.0)
    Zt = (Y_t - mean) / safe
    Zb = (Y_b - mean) / safe
    denom = float(np.sum(Zb ** 2)) / Y_b.shape[0]
    if denom == 0.0:
        raise ValueError("background trace is zero (all concatenated columns constant)")
    return (float(np.sum(Zt ** 2)) / Y_t.shape[0]) / denom


def bhattacharyya_gaussian(Y_target, Y_background, regularization: float = 1e-9) -> float:
    """Bhattacharyya distance under Gaussian estimates of both samples.

    D = (1/8) dm' S^-1 dm + (1/2) ln(det S / sqrt(det S_T det S_B)) with
    S the average of the two sample covariances; covariances are regularized
    by ``regularization * I`` before inversion and determinants.
    """
    d = np.asarray(Y_target).shape[1] if np.asarray(Y_target).ndim == 2 else 1
    Y_t = check_feature_matrix(Y_target, "target embedding", min_rows=d + 1)
    Y_b = check_feature_matrix(Y_background, "background embedding", min_rows=d + 1)
    check_matching_columns(Y_t, Y_b)
    eye = regularization * np.eye(Y_t.shape[1])
    cov_t = np.cov(Y_t, rowvar=False).reshape(Y_t.shape[1], -1) + eye
    cov_b = np.cov(Y_b, rowvar=False).reshape(Y_b.shape[1], -1) + eye
    cov = (cov_t + cov_b) / 2.0
    dm = Y_t.mean(axis=0) - Y_b.mean(axis=0)
    sign, logdet = np.linalg.slogdet(cov)
    sign_t, logdet_t = np.linalg.slogdet(cov_t)
    sign_b, logdet_b = np.linalg.slogdet(cov_b)
    if min(sign, sign_t, sign_b) <= 0:
        raise ValueError("covariance is singular even after regularization")
    mean_term = float(dm @ np.linalg.solve(cov, dm)) / 8.0
    return mean_term + 0.5 * (logdet - 0.5 * (logdet_t + logdet_b))


def kl_knn(Y_target, Y_background, k: int = 1) -> float:
    """k-nearest-neighbor estimate of KL(P_target || P_background).

    Uses the k-th neighbor distance within the target sample (excluding the
    query row) against the k-th neighbor distance into the background sample.
    Slightly negative estimates are possible and reported as-is.
    """
    Y_t = check_feature_matrix(Y_target, "target sample", min_rows=2)
    Y_b = check_feature_matrix(Y_background, "background sample")
    check_matching_columns(Y_t, Y_b)
    n_t, d = Y_t.shape
    n_b = Y_b.shape[0]
    if not 1 <= k < n_t:
        raise ValueError(f"k must satisfy 1 <= k < {n_t}, got {k}")
    if k > n_b:
        raise ValueError(f"k={k} exceeds the background sample size {n_b}")
    rho = cKDTree(Y_t).query(Y_t, k=k + 1)[0][:, k]
    nu = cKDTree(Y_b).query(Y_t, k=k)[0]
    if k > 1:
        nu = nu[:, k - 1]
    rho = np.maximum(rho, 1e-12)
    nu = np.maximum(nu, 1e-12)
    return float(d / n_t * np.sum(np.log(nu / rho)) + np.log(n_b / (n_t - 1)))


def score_embeddings(Y_target, Y_background, k: int = 1) -> MetricReport:
    """All three contrast metrics for one embedding pair."""
    return MetricReport(
        dispersion_ratio(Y_target, Y_background),
        bhattacharyya_gaussian(Y_target, Y_background),
        kl_knn(Y_target, Y_background, k=k),
    )
