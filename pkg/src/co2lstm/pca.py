"""Covariance PCA on a sector feature matrix, with a cyclic Jacobi eigensolver."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import KTooLarge, NoConvergence, NotSymmetric, TooFewRows, ZeroVariance
from .ingest import FeatureMatrix

MAX_SWEEPS = 100


def _matrix(m) -> tuple[np.ndarray, tuple[str, ...]]:
    if isinstance(m, FeatureMatrix):
        return np.asarray(m.data, dtype=float), m.col_labels
    x = np.asarray(m, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {x.shape}")
    return x, tuple(f"x{j}" for j in range(x.shape[1]))


def covariance(m, center: bool = True) -> np.ndarray:
    """Population covariance ``(1/n) sum x_i x_i^T``.

    With ``center=False`` the rows are used as-is (no mean removal), which is
    the literal second-moment form; it only equals the covariance for
    zero-mean data.
    """
    x, _ = _matrix(m)
    n, d = x.shape
    if n < 2 or d < 1:
        raise TooFewRows(f"covariance needs n >= 2 rows and d >= 1 columns, got {x.shape}")
    if center:
        x = x - x.mean(axis=0)
    c = x.T @ x / n
    return 0.5 * (c + c.T)


def eigen_symmetric(a, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps rotate every upper off-diagonal pair in row-major order until the
    largest off-diagonal magnitude is at most ``tol * ||A||_F``.

    Returns
    -------
    eigenvalues : (d,) array, descending
    eigenvectors : (d, d) array, column ``j`` paired with ``eigenvalues[j]``;
        each column's largest-magnitude entry is positive.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    d = a.shape[0]
    scale = np.abs(a).max() if a.size else 0.0
    if np.abs(a - a.T).max(initial=0.0) > 1e-9 * scale:
        raise NotSymmetric("matrix is not symmetric within 1e-9 of its largest entry")
    a = 0.5 * (a + a.T)
    v = np.eye(d)
    limit = tol * np.linalg.norm(a)

    def off_max(mat):
        if d < 2:
            return 0.0
        return np.abs(mat[np.triu_indices(d, 1)]).max()

    sweeps = 0
    while off_max(a) > limit:
        if sweeps == MAX_SWEEPS:
            raise NoConvergence(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")
        sweeps += 1
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:  # theta**2 would overflow
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq

    eigvals = np.diag(a).copy()
    order = np.argsort(-eigvals, kind="stable")
    eigvals, v = eigvals[order], v[:, order]
    for j in range(d):
        if v[np.argmax(np.abs(v[:, j])), j] < 0:
            v[:, j] = -v[:, j]
    return eigvals, v


@dataclass(frozen=True)
class PcaResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    explained_ratio: np.ndarray
    mean: np.ndarray
    labels: tuple[str, ...]
    sector_attribution: dict[int, str]

    @property
    def loadings(self) -> np.ndarray:
        return self.eigenvectors

    def to_dict(self, k: int | None = None) -> dict:
        """JSON-ready report; ``k`` marks the leading components as selected."""
        d = len(self.labels)
        return {
            "labels": list(self.labels),
            "eigenvalues": self.eigenvalues.tolist(),
            "ratios": self.explained_ratio.tolist(),
            "loadings": self.eigenvectors.tolist(),
            "attribution": [self.sector_attribution[j] for j in range(d)],
            "selected": list(range(min(k, d))) if k else [],
            "mean": self.mean.tolist(),
        }


def _attribute(vec: np.ndarray, labels: tuple[str, ...]) -> str:
    mags = np.abs(vec)
    # near-equal loadings go to the earlier column (columns are in sector order)
    best = int(np.flatnonzero(mags >= mags.max() * (1 - 1e-12))[0])
    return labels[best]


def pca_fit(m) -> PcaResult:
    """Centered PCA with explained-variance ratios and max-loading attribution."""
    x, labels = _matrix(m)
    cov = covariance(x, center=True)
    eigvals, eigvecs = eigen_symmetric(cov)
    eps = 1e-10 * np.trace(cov)
    if np.any(eigvals < -eps):
        raise ValueError(f"covariance has a negative eigenvalue {eigvals.min()} beyond tolerance")
    clamped = np.clip(eigvals, 0.0, None)
    total = clamped.sum()
    if total == 0:
        raise ZeroVariance("data have zero total variance")
    attribution = {j: _attribute(eigvecs[:, j], labels) for j in range(len(labels))}
    return PcaResult(eigvals, eigvecs, clamped / total, x.mean(axis=0), labels, attribution)


def project(r: PcaResult, m, k: int) -> np.ndarray:
    """Scores of the centered rows on the first ``k`` components."""
    x, _ = _matrix(m)
    d = r.eigenvectors.shape[0]
    if not 1 <= k <= d:
        raise KTooLarge(f"k={k} must lie in [1, {d}]")
    return (x - r.mean) @ r.eigenvectors[:, :k]


def reconstruct(r: PcaResult, scores: np.ndarray) -> np.ndarray:
    """Map scores back to data space (exact when all components are kept)."""
    k = scores.shape[1]
    return scores @ r.eigenvectors[:, :k].T + r.mean
