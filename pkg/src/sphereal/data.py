"""Dataset ingestion, benchmark sub-setting, and synthetic sphere-cap fixtures.

Feature files come in two bit-exact formats: headerless CSV (one sample per
row) or the "SCL1" binary layout (magic bytes, u32-LE row count, u32-LE
column count, row-major f64-LE values).  Label files are headerless CSV with
one integer per line; label 0 marks background pixels, which are excluded
from the pipeline but kept in the index map for map rendering.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import beta as beta_dist

from .errors import ConfigError, DataError, ParameterError
from .preprocess import as_unit_points

__all__ = [
    "RawDataset",
    "SyntheticSpec",
    "BenchmarkSpec",
    "GRID_DEFAULTS",
    "random_cap_centers",
    "sample_spherical_cap",
    "geodesic_midpoint",
    "generate_synthetic",
    "support_pieces",
    "load_features",
    "load_labels",
    "write_features_binary",
    "load_benchmark",
]

BINARY_MAGIC = b"SCL1"

# Scene grids for the named benchmarks (height, width); overridable per spec.
GRID_DEFAULTS = {
    "salinas": (512, 217),
    "indian_pines_subset": (145, 145),
}


@dataclass
class RawDataset:
    """Feature matrix plus integer labels (0 = background).

    ``grid_dims`` and ``pixel_indices`` tie rows back to image pixels for
    map rendering; both are None for non-image data.
    """

    features: np.ndarray
    labels: np.ndarray
    grid_dims: tuple[int, int] | None = None
    pixel_indices: np.ndarray | None = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        if self.labels.shape != (self.features.shape[0],):
            raise DataError(
                f"labels length {self.labels.shape} does not match "
                f"{self.features.shape[0]} feature rows"
            )
        if self.pixel_indices is not None:
            self.pixel_indices = np.asarray(self.pixel_indices, dtype=np.int64)
            if self.pixel_indices.shape != (self.features.shape[0],):
                raise DataError("pixel_indices length must match feature rows")
            if self.grid_dims is not None:
                cells = self.grid_dims[0] * self.grid_dims[1]
                if self.pixel_indices.size and (
                    self.pixel_indices.min() < 0 or self.pixel_indices.max() >= cells
                ):
                    raise DataError("pixel_indices fall outside the grid")

    @property
    def sample_count(self) -> int:
        return self.features.shape[0]


@dataclass
class SyntheticSpec:
    """Union-of-caps fixture with known support.

    ``overlap_fraction`` of each class's points is drawn from a band at the
    geodesic midpoint between the class center and its nearest neighbor,
    mimicking a shared class boundary.  With overlap 0 the caps must be
    disjoint (pairwise center distance > 2 * cap_radius).
    """

    cap_centers: np.ndarray
    cap_radius: float
    points_per_class: int
    overlap_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        self.cap_centers = as_unit_points(self.cap_centers)
        if self.cap_radius <= 0.0 or self.cap_radius >= math.pi:
            raise ParameterError(f"cap_radius must lie in (0, pi), got {self.cap_radius}")
        if self.points_per_class < 1:
            raise ParameterError("points_per_class must be >= 1")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise ParameterError(
                f"overlap_fraction must lie in [0, 1), got {self.overlap_fraction}"
            )
        if self.class_count > 1:
            angles = _pairwise_geodesic(self.cap_centers)
            off_diag = angles[~np.eye(self.class_count, dtype=bool)]
            if self.overlap_fraction == 0.0 and off_diag.min() <= 2 * self.cap_radius:
                raise ParameterError(
                    "caps overlap (pairwise center distance <= 2 * cap_radius) "
                    "but overlap_fraction is 0"
                )

    @property
    def class_count(self) -> int:
        return self.cap_centers.shape[0]

    @property
    def sphere_dim(self) -> int:
        return self.cap_centers.shape[1] - 1


@dataclass
class BenchmarkSpec:
    """Benchmark sub-setting protocol: class filter, stratified fraction, window."""

    name: str
    class_filter: tuple[int, ...] | None = None
    per_class_fraction: float = 1.0
    subset_window: tuple[tuple[int, int], tuple[int, int]] | None = None
    seed: int = 0
    grid_dims: tuple[int, int] | None = None

    def __post_init__(self):
        if not 0.0 < self.per_class_fraction <= 1.0:
            raise ParameterError(
                f"per_class_fraction must lie in (0, 1], got {self.per_class_fraction}"
            )
        if self.grid_dims is None:
            self.grid_dims = GRID_DEFAULTS.get(self.name)
        if self.class_filter is not None:
            self.class_filter = tuple(int(c) for c in self.class_filter)
            if any(c <= 0 for c in self.class_filter):
                raise ParameterError("class_filter must contain positive class ids")


def _pairwise_geodesic(points: np.ndarray) -> np.ndarray:
    gram = np.clip(points @ points.T, -1.0, 1.0)
    return np.arccos(gram)


def random_cap_centers(
    count: int, sphere_dim: int, min_separation: float, seed: int
) -> np.ndarray:
    """Seeded rejection sampling of unit vectors with pairwise geodesic spacing."""
    if count < 1 or sphere_dim < 1:
        raise ParameterError("need count >= 1 and sphere_dim >= 1")
    rng = np.random.default_rng(seed)
    centers: list[np.ndarray] = []
    attempts = 0
    while len(centers) < count:
        attempts += 1
        if attempts > 10000 * count:
            raise ParameterError(
                f"cannot place {count} centers at separation {min_separation} "
                f"on S^{sphere_dim}"
            )
        v = rng.standard_normal(sphere_dim + 1)
        v /= np.linalg.norm(v)
        if all(math.acos(min(1.0, max(-1.0, float(v @ c)))) >= min_separation for c in centers):
            centers.append(v)
    return np.vstack(centers)


def sample_spherical_cap(
    center: np.ndarray, radius: float, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw ``count`` points uniformly (surface measure) from a spherical cap.

    For a uniform point on S^q the height t = <x, center> satisfies
    (1 + t) / 2 ~ Beta(q/2, q/2); conditioning on the cap restricts t to
    [cos(radius), 1], sampled by inverse CDF.  The tangential part is an
    isotropic direction orthogonal to the center.
    """
    center = np.asarray(center, dtype=np.float64)
    q = center.size - 1
    if q < 1:
        raise ParameterError("cap sampling needs ambient dimension >= 2")
    lo = beta_dist.cdf((1.0 + math.cos(radius)) / 2.0, q / 2.0, q / 2.0)
    u = rng.uniform(lo, 1.0, size=count)
    t = 2.0 * beta_dist.ppf(u, q / 2.0, q / 2.0) - 1.0
    t = np.clip(t, -1.0, 1.0)

    tangent = rng.standard_normal((count, q + 1))
    tangent -= np.outer(tangent @ center, center)
    norms = np.linalg.norm(tangent, axis=1)
    while np.any(norms < 1e-12):
        redo = norms < 1e-12
        fresh = rng.standard_normal((int(redo.sum()), q + 1))
        fresh -= np.outer(fresh @ center, center)
        tangent[redo] = fresh
        norms = np.linalg.norm(tangent, axis=1)
    tangent /= norms[:, None]

    points = t[:, None] * center + np.sqrt(1.0 - t * t)[:, None] * tangent
    return points / np.linalg.norm(points, axis=1)[:, None]


def geodesic_midpoint(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Midpoint of the shorter great-circle arc between two unit vectors."""
    mid = np.asarray(a, dtype=np.float64) + np.asarray(b, dtype=np.float64)
    norm = np.linalg.norm(mid)
    if norm < 1e-12:
        raise ParameterError("geodesic midpoint of antipodal points is undefined")
    return mid / norm


def _band_centers(spec: SyntheticSpec) -> np.ndarray:
    """Per-class overlap-band centers: midpoint toward the nearest other center."""
    centers = spec.cap_centers
    angles = _pairwise_geodesic(centers)
    np.fill_diagonal(angles, np.inf)
    nearest = np.argmin(angles, axis=1)
    return np.vstack(
        [geodesic_midpoint(centers[k], centers[nearest[k]]) for k in range(spec.class_count)]
    )


def generate_synthetic(spec: SyntheticSpec) -> RawDataset:
    """Seeded, reproducible samples: per class, cap points plus overlap-band points.

    Rows are ordered class by class (cap block first, band block second), so
    identical specs produce byte-identical datasets.  Labels are 1..K.
    """
    rng = np.random.default_rng(spec.seed)
    band_centers = _band_centers(spec) if spec.class_count > 1 else None
    blocks = []
    labels = []
    for k in range(spec.class_count):
        n_band = int(round(spec.overlap_fraction * spec.points_per_class))
        n_cap = spec.points_per_class - n_band
        if n_cap:
            blocks.append(
                sample_spherical_cap(spec.cap_centers[k], spec.cap_radius, n_cap, rng)
            )
        if n_band:
            if band_centers is None:
                raise ParameterError("overlap_fraction > 0 needs at least two classes")
            blocks.append(
                sample_spherical_cap(band_centers[k], spec.cap_radius, n_band, rng)
            )
        labels.append(np.full(spec.points_per_class, k + 1, dtype=np.int64))
    return RawDataset(np.vstack(blocks), np.concatenate(labels))


def support_pieces(spec: SyntheticSpec) -> list[tuple[np.ndarray, float]]:
    """(center, radius) caps whose union is the spec's true support."""
    pieces = [(spec.cap_centers[k], spec.cap_radius) for k in range(spec.class_count)]
    if spec.overlap_fraction > 0.0 and spec.class_count > 1:
        for center in _band_centers(spec):
            pieces.append((center, spec.cap_radius))
    return pieces


def load_features(path) -> np.ndarray:
    """Read a feature matrix from CSV or SCL1 binary (detected by magic bytes)."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"feature file not found: {path}")
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == BINARY_MAGIC:
        raw = path.read_bytes()
        if len(raw) < 12:
            raise DataError(f"binary feature file {path} truncated before header")
        rows, cols = struct.unpack_from("<II", raw, 4)
        expected = 12 + rows * cols * 8
        if len(raw) != expected:
            raise DataError(
                f"binary feature file {path} has {len(raw)} bytes, expected {expected} "
                f"for {rows}x{cols}"
            )
        matrix = np.frombuffer(raw, dtype="<f8", offset=12).reshape(rows, cols)
        matrix = matrix.astype(np.float64)
    else:
        try:
            matrix = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
        except ValueError as exc:
            raise DataError(f"cannot parse CSV feature file {path}: {exc}") from exc
    finite_rows = np.all(np.isfinite(matrix), axis=1)
    if not np.all(finite_rows):
        bad = int(np.flatnonzero(~finite_rows)[0])
        raise DataError(f"feature file {path} has a non-finite value in row {bad}")
    return matrix


def write_features_binary(path, matrix) -> None:
    """Write the SCL1 binary feature format (the documented bit-exact layout)."""
    arr = np.ascontiguousarray(np.asarray(matrix, dtype="<f8"))
    if arr.ndim != 2:
        raise ParameterError("feature matrix must be 2-D")
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<II", arr.shape[0], arr.shape[1]))
        fh.write(arr.tobytes(order="C"))


def load_labels(path) -> np.ndarray:
    """Read a headerless label file, one integer per line (0 = background)."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"label file not found: {path}")
    try:
        labels = np.loadtxt(path, dtype=np.int64, ndmin=1)
    except ValueError as exc:
        raise DataError(f"cannot parse label file {path}: {exc}") from exc
    if labels.ndim != 1:
        raise DataError(f"label file {path} must hold one integer per line")
    if labels.min() < 0:
        raise DataError(f"label file {path} contains negative labels")
    return labels


def load_benchmark(spec: BenchmarkSpec, feature_file, label_file) -> RawDataset:
    """Load a benchmark and apply window, background exclusion, class filter,
    and seeded stratified sampling (ceiling of fraction * class count)."""
    features = load_features(feature_file)
    labels = load_labels(label_file)
    if labels.shape[0] != features.shape[0]:
        raise DataError(
            f"feature rows ({features.shape[0]}) and labels ({labels.shape[0]}) disagree"
        )
    if spec.name == "indian_pines_subset" and spec.subset_window is None:
        raise ConfigError(
            "the indian_pines_subset protocol requires an explicit subset window "
            "(its location inside the scene is a config field)"
        )

    grid = spec.grid_dims
    pixel_indices = np.arange(features.shape[0], dtype=np.int64)
    if grid is not None:
        height, width = grid
        if height * width != features.shape[0]:
            raise DataError(
                f"grid {height}x{width} has {height * width} cells but the feature "
                f"file has {features.shape[0]} rows"
            )

    if spec.subset_window is not None:
        if grid is None:
            raise ConfigError("subset_window requires grid dimensions")
        (r0, r1), (c0, c1) = spec.subset_window
        height, width = grid
        if not (0 <= r0 < r1 <= height and 0 <= c0 < c1 <= width):
            raise ConfigError(
                f"window rows [{r0},{r1}) cols [{c0},{c1}) outside grid {height}x{width}"
            )
        rows = pixel_indices // width
        cols = pixel_indices % width
        inside = (rows >= r0) & (rows < r1) & (cols >= c0) & (cols < c1)
        features = features[inside]
        labels = labels[inside]
        # Re-map pixel indices into the window-local grid.
        pixel_indices = (rows[inside] - r0) * (c1 - c0) + (cols[inside] - c0)
        grid = (r1 - r0, c1 - c0)

    foreground = labels > 0
    features = features[foreground]
    pixel_indices = pixel_indices[foreground]
    labels = labels[foreground]

    present = np.unique(labels)
    if spec.class_filter is not None:
        missing = sorted(set(spec.class_filter) - set(present.tolist()))
        if missing:
            raise DataError(
                f"classes {missing} absent from the data; available classes: "
                f"{present.tolist()}"
            )
        keep = np.isin(labels, spec.class_filter)
        features, labels, pixel_indices = features[keep], labels[keep], pixel_indices[keep]

    if spec.per_class_fraction < 1.0:
        rng = np.random.default_rng(spec.seed)
        chosen: list[np.ndarray] = []
        for cls in np.unique(labels):
            idx = np.flatnonzero(labels == cls)
            take = int(math.ceil(spec.per_class_fraction * idx.size))
            chosen.append(rng.choice(idx, size=take, replace=False))
        sel = np.sort(np.concatenate(chosen))
        features, labels, pixel_indices = features[sel], labels[sel], pixel_indices[sel]

    return RawDataset(features, labels, grid_dims=grid, pixel_indices=pixel_indices)
