"""PCA reduction, hypersphere projection, and geodesic angle matrices.

Every operation here is a pure function of its inputs.  Points on the
sphere are represented as the rows of a float64 matrix with unit Euclidean
norm; the geodesic distance between rows is arccos of their inner product.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError, DegeneratePointError, ParameterError

__all__ = [
    "pca_reduce",
    "project_to_sphere",
    "angle_matrix",
    "as_unit_points",
]

UNIT_NORM_TOL = 1e-12


def _as_matrix(features) -> np.ndarray:
    arr = np.asarray(features, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ParameterError("features must be a 2-D matrix with M >= 1, d >= 1")
    return arr


def as_unit_points(points) -> np.ndarray:
    """Validate an (M, q+1) matrix of unit rows and return it as float64."""
    arr = _as_matrix(points)
    norms = np.linalg.norm(arr, axis=1)
    worst = np.max(np.abs(norms - 1.0)) if arr.size else 0.0
    if worst > 1e-9:
        bad = int(np.argmax(np.abs(norms - 1.0)))
        raise ParameterError(
            f"row {bad} is not on the unit sphere (|norm - 1| = {worst:.3e})"
        )
    return arr


def pca_reduce(
    features,
    target_dim: int | None = None,
    variance_fraction: float | None = None,
    max_dim: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Project column-centered data onto its top principal directions.

    Exactly one of ``target_dim`` and ``variance_fraction`` selects the
    output dimension d'; with a fraction, d' is the smallest dimension whose
    cumulative explained-variance fraction reaches it (optionally capped by
    ``max_dim``).  Returns ``(reduced, explained_variance)`` where the
    second entry holds the per-component fractions of total variance,
    non-increasing.  All-zero variance (a single sample) yields zero
    fractions.

    The factorization is a deterministic eigendecomposition of the sample
    covariance with the sign convention that the largest-magnitude
    coordinate of each principal direction is positive, so repeated runs
    are bit-stable.
    """
    data = _as_matrix(features)
    if not np.all(np.isfinite(data)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(data), axis=1))[0])
        raise DataError(f"features contain non-finite values (first bad row: {bad})")
    n_samples, n_features = data.shape
    if (target_dim is None) == (variance_fraction is None):
        raise ParameterError(
            "exactly one of target_dim and variance_fraction must be given"
        )

    centered = data - data.mean(axis=0)
    cov = (centered.T @ centered) / max(n_samples - 1, 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.maximum(eigvals[order], 0.0)
    eigvecs = eigvecs[:, order]

    # Sign convention: flip each direction so its largest-|coordinate| entry
    # is positive (first index wins magnitude ties).
    anchor = np.argmax(np.abs(eigvecs), axis=0)
    signs = np.sign(eigvecs[anchor, np.arange(eigvecs.shape[1])])
    signs[signs == 0.0] = 1.0
    eigvecs = eigvecs * signs

    total = float(eigvals.sum())
    fractions = eigvals / total if total > 0.0 else np.zeros_like(eigvals)

    if target_dim is not None:
        if target_dim < 1 or target_dim > min(n_samples, n_features):
            raise ParameterError(
                f"target_dim {target_dim} outside [1, min(M, d)] = "
                f"[1, {min(n_samples, n_features)}]"
            )
        out_dim = int(target_dim)
    else:
        if not 0.0 < variance_fraction <= 1.0:
            raise ParameterError(
                f"variance_fraction must lie in (0, 1], got {variance_fraction}"
            )
        cumulative = np.cumsum(fractions)
        reached = np.flatnonzero(cumulative >= variance_fraction - 1e-12)
        out_dim = int(reached[0]) + 1 if reached.size else n_features
        out_dim = min(out_dim, min(n_samples, n_features))
        if max_dim is not None:
            out_dim = min(out_dim, int(max_dim))
        out_dim = max(out_dim, 1)

    reduced = centered @ eigvecs[:, :out_dim]
    return reduced, fractions[:out_dim]


def project_to_sphere(reduced, method: str = "normalize") -> np.ndarray:
    """Map reduced rows onto the unit hypersphere.

    ``normalize`` divides each row by its norm (output dimension unchanged,
    so points live on the sphere of one lower intrinsic dimension);
    ``stereographic`` lifts R^m to S^m by appending a coordinate,
    y -> (2y, |y|^2 - 1) / (|y|^2 + 1), which never degenerates.
    """
    data = _as_matrix(reduced)
    if method == "normalize":
        norms = np.linalg.norm(data, axis=1)
        small = np.flatnonzero(norms < UNIT_NORM_TOL)
        if small.size:
            raise DegeneratePointError(int(small[0]), float(norms[small[0]]))
        return data / norms[:, None]
    if method == "stereographic":
        sq = np.sum(data * data, axis=1)
        denom = sq + 1.0
        lifted = np.empty((data.shape[0], data.shape[1] + 1))
        lifted[:, :-1] = 2.0 * data / denom[:, None]
        lifted[:, -1] = (sq - 1.0) / denom
        return lifted
    raise ParameterError(f"unknown projection method {method!r}")


def angle_matrix(points) -> np.ndarray:
    """Pairwise geodesic angles arccos(<x_i, x_j>), clamped, symmetric, zero diagonal.

    Safe to compute in row blocks over a read-only input; this dense
    variant is fine at desk scale.
    """
    pts = as_unit_points(points)
    gram = pts @ pts.T
    gram = (gram + gram.T) / 2.0
    angles = np.arccos(np.clip(gram, -1.0, 1.0))
    np.fill_diagonal(angles, 0.0)
    return angles
