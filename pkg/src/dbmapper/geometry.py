"""Point-cloud primitives: containers, exact k-NN, Hausdorff and modulus of continuity.

All distances are Euclidean.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import InputFormatError, InvalidParameterError


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InvalidParameterError(
                f"point cloud must be a non-empty (n, d) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InvalidParameterError("point cloud contains non-finite coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def subset(self, idx) -> "PointCloud":
        return PointCloud(self.points[np.asarray(idx, dtype=int)])


@dataclass(frozen=True)
class LensMap:
    values: np.ndarray
    lo: float = field(init=False)
    hi: float = field(init=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).ravel()
        if vals.size < 1:
            raise InvalidParameterError("lens map must have at least one value")
        if not np.all(np.isfinite(vals)):
            raise InvalidParameterError("lens map contains non-finite values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "lo", float(vals.min()))
        object.__setattr__(self, "hi", float(vals.max()))

    def __len__(self):
        return self.values.size

    def check_matches(self, cloud: PointCloud) -> None:
        if len(self) != cloud.n:
            raise InvalidParameterError(
                f"lens has {len(self)} values but cloud has {cloud.n} points")


@dataclass(frozen=True)
class NeighborGraph:
    """Per-point k nearest neighbours, closest first, self excluded."""

    k: int
    neighbors: np.ndarray

    def __post_init__(self):
        nb = np.asarray(self.neighbors, dtype=np.intp)
        if nb.ndim != 2 or nb.shape[1] != self.k:
            raise InvalidParameterError(f"neighbors must have shape (n, {self.k})")
        nb.setflags(write=False)
        object.__setattr__(self, "neighbors", nb)

    def __len__(self):
        return self.neighbors.shape[0]


def _as_cloud(x) -> PointCloud:
    return x if isinstance(x, PointCloud) else PointCloud(x)


def _row_dist(points: np.ndarray, i: int, idx: np.ndarray) -> np.ndarray:
    diff = points[idx] - points[i]
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def knn(cloud: PointCloud, k: int) -> NeighborGraph:
    """Exact k nearest neighbours of every point.

    Ties in distance are broken by the lower point index, so the result is
    fully deterministic. A k-d tree finds the k-th neighbour radius and a
    ball query at that radius collects every tied candidate.
    """
    cloud = _as_cloud(cloud)
    n = cloud.n
    if not (1 <= int(k) < n):
        raise InvalidParameterError(f"k must satisfy 1 <= k < n (k={k}, n={n})")
    k = int(k)
    pts = cloud.points
    tree = cKDTree(pts)
    dist, _ = tree.query(pts, k=k + 1)
    radius = dist[:, -1]
    radius = radius * (1 + 1e-9) + 1e-12
    balls = tree.query_ball_point(pts, r=radius)
    out = np.empty((n, k), dtype=np.intp)
    for i in range(n):
        cand = np.asarray(balls[i], dtype=np.intp)
        cand = cand[cand != i]
        d = _row_dist(pts, i, cand)
        order = np.lexsort((cand, d))
        out[i] = cand[order[:k]]
    return NeighborGraph(k, out)


def hausdorff_estimate(sample: PointCloud, reference: PointCloud) -> float:
    """Symmetric Hausdorff distance between two finite clouds.

    ``reference`` stands in for the underlying space via a dense sample, so the
    result approximates the distance from the sample to the space itself.
    """
    sample, reference = _as_cloud(sample), _as_cloud(reference)
    if sample.dim != reference.dim:
        raise InvalidParameterError(
            f"dimension mismatch: {sample.dim} vs {reference.dim}")
    d_ab, _ = cKDTree(reference.points).query(sample.points, k=1)
    d_ba, _ = cKDTree(sample.points).query(reference.points, k=1)
    return float(max(d_ab.max(), d_ba.max()))


def rips_edges(cloud: PointCloud, delta: float) -> np.ndarray:
    """All index pairs (i < j) with ||x_i - x_j|| <= delta, shape (m, 2)."""
    cloud = _as_cloud(cloud)
    if delta <= 0:
        raise InvalidParameterError("delta must be positive")
    pairs = cKDTree(cloud.points).query_pairs(r=float(delta), output_type="ndarray")
    if pairs.size == 0:
        return np.empty((0, 2), dtype=np.intp)
    pairs = np.sort(pairs.astype(np.intp), axis=1)
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]


def modulus_of_continuity(cloud: PointCloud, lens: LensMap, delta: float) -> float:
    """Largest lens difference over pairs of points at distance <= delta."""
    if delta <= 0:
        raise InvalidParameterError("delta must be positive")
    cloud = _as_cloud(cloud)
    lens.check_matches(cloud)
    pairs = rips_edges(cloud, delta)
    if pairs.size == 0:
        return 0.0
    t = lens.values
    return float(np.abs(t[pairs[:, 0]] - t[pairs[:, 1]]).max())


# ---------------------------------------------------------------- CSV I/O

def read_csv(path, lens_column: str | None = None) -> tuple[PointCloud, LensMap]:
    """Read points and lens values from a CSV with a header row.

    The lens column is ``lens_column`` if given, else a column named ``lens``,
    else the last column. Every other column is an ambient coordinate.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InputFormatError(f"{path}: empty file, a header row is required")
    header = [h.strip() for h in rows[0]]
    if lens_column is not None:
        if lens_column not in header:
            raise InputFormatError(
                f"{path}: lens column {lens_column!r} not found in header {header}; "
                "expected d coordinate columns plus a lens column")
        li = header.index(lens_column)
    elif "lens" in header:
        li = header.index("lens")
    else:
        li = len(header) - 1
    if len(header) < 2:
        raise InputFormatError(
            f"{path}: need at least one coordinate column and a lens column "
            f"(named 'lens' or last), got header {header}")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise InputFormatError(f"{path}: non-numeric value ({exc})") from None
    if data.ndim != 2 or data.shape[0] == 0:
        raise InputFormatError(f"{path}: no data rows")
    if data.shape[1] != len(header):
        raise InputFormatError(f"{path}: rows do not match header width {len(header)}")
    coords = np.delete(data, li, axis=1)
    return PointCloud(coords), LensMap(data[:, li])


def write_csv(path, cloud: PointCloud, lens: LensMap | None = None,
              names: list[str] | None = None) -> None:
    cloud = _as_cloud(cloud)
    names = names or [f"x{j}" for j in range(cloud.dim)]
    cols = [cloud.points[:, j] for j in range(cloud.dim)]
    header = list(names)
    if lens is not None:
        header.append("lens")
        cols.append(lens.values)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])
