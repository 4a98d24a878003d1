"""Per-slice clustering: single linkage (Rips components) and weighted DBSCAN."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import InvalidParameterError
from .geometry import PointCloud

NOISE = -1


@dataclass(frozen=True)
class ClusterAssignment:
    """Cluster id per input point, ``NOISE`` (-1) for unclustered points.

    Ids are contiguous and numbered by each cluster's lowest point position.
    """

    labels: np.ndarray
    cluster_count: int

    def members(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster_id)

    @property
    def noise(self) -> np.ndarray:
        return np.flatnonzero(self.labels == NOISE)


def _coords(points) -> np.ndarray:
    if isinstance(points, PointCloud):
        return points.points
    arr = np.asarray(points, dtype=float)
    return arr[:, None] if arr.ndim == 1 else arr


def _relabel(raw: np.ndarray) -> ClusterAssignment:
    """Map arbitrary component ids (negative = noise) to ids by first appearance."""
    out = np.full(raw.shape, NOISE, dtype=np.intp)
    mapping: dict[int, int] = {}
    for pos, lab in enumerate(raw.tolist()):
        if lab < 0:
            continue
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[pos] = mapping[lab]
    return ClusterAssignment(out, len(mapping))


def _components(m: int, pairs: np.ndarray) -> np.ndarray:
    if pairs.size == 0:
        return np.arange(m)
    adj = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(m, m))
    return connected_components(adj, directed=False)[1]


def single_linkage(points, delta: float) -> ClusterAssignment:
    """Connected components of the graph joining points at distance <= delta."""
    if not delta > 0:
        raise InvalidParameterError(f"delta must be positive, got {delta}")
    X = _coords(points)
    m = X.shape[0]
    if m == 0:
        return ClusterAssignment(np.empty(0, dtype=np.intp), 0)
    pairs = cKDTree(X).query_pairs(r=float(delta), output_type="ndarray")
    return _relabel(_components(m, pairs))


def weighted_dbscan(points, weights, eps: float, min_weight: float) -> ClusterAssignment:
    """DBSCAN where a point is core iff the weights within ``eps`` (itself
    included) sum to at least ``min_weight``.

    Clusters are components of core points under eps-adjacency. A border
    point joins the lowest-id cluster among its core neighbours; anything
    else is noise.
    """
    if not eps > 0 or not min_weight > 0:
        raise InvalidParameterError("eps and min_weight must be positive")
    X = _coords(points)
    m = X.shape[0]
    w = np.ones(m) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (m,):
        raise InvalidParameterError("need one weight per point")
    if np.any(w <= 0):
        raise InvalidParameterError("weights must be positive")
    if m == 0:
        return ClusterAssignment(np.empty(0, dtype=np.intp), 0)

    pairs = cKDTree(X).query_pairs(r=float(eps), output_type="ndarray")
    mass = w.copy()
    if pairs.size:
        np.add.at(mass, pairs[:, 0], w[pairs[:, 1]])
        np.add.at(mass, pairs[:, 1], w[pairs[:, 0]])
    # tolerate summation order noise at an exact threshold
    core = mass >= min_weight * (1 - 1e-12)

    raw = np.full(m, NOISE, dtype=np.intp)
    core_idx = np.flatnonzero(core)
    if core_idx.size == 0:
        return ClusterAssignment(raw, 0)
    if pairs.size:
        cc = pairs[core[pairs[:, 0]] & core[pairs[:, 1]]]
    else:
        cc = pairs
    comp = _components(m, cc)
    raw[core_idx] = comp[core_idx]
    assigned = _relabel(raw)
    labels = assigned.labels.copy()

    if pairs.size:
        # border points: lowest cluster id among core neighbours
        a, b = pairs[:, 0], pairs[:, 1]
        best = np.full(m, np.iinfo(np.intp).max, dtype=np.intp)
        sel = core[a] & ~core[b]
        np.minimum.at(best, b[sel], labels[a[sel]])
        sel = core[b] & ~core[a]
        np.minimum.at(best, a[sel], labels[b[sel]])
        border = (~core) & (best != np.iinfo(np.intp).max)
        labels[border] = best[border]
    return ClusterAssignment(labels, assigned.cluster_count)


@dataclass(frozen=True)
class Clusterer:
    """Named clustering strategy plus its parameters.

    ``single-linkage`` takes ``delta``; ``dbscan`` takes ``eps`` and
    ``min_weight``. New strategies register in ``STRATEGIES``.
    """

    name: str = "single-linkage"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in STRATEGIES:
            raise InvalidParameterError(
                f"unknown clusterer {self.name!r}; known: {sorted(STRATEGIES)}")
        missing = [p for p in STRATEGIES[self.name][1] if p not in self.params]
        if missing:
            raise InvalidParameterError(f"clusterer {self.name!r} needs parameters {missing}")

    @property
    def accepts_weights(self) -> bool:
        return self.name == "dbscan"

    @property
    def linkage_radius(self) -> float:
        """Distance at which two points count as directly connected."""
        return float(self.params["delta"] if self.name == "single-linkage"
                     else self.params["eps"])

    def __call__(self, points, weights=None) -> ClusterAssignment:
        fn = STRATEGIES[self.name][0]
        return fn(points, weights, **self.params)

    def describe(self) -> dict:
        return {"name": self.name, **self.params}


def _sl(points, weights, delta):
    return single_linkage(points, delta)


def _db(points, weights, eps, min_weight):
    return weighted_dbscan(points, weights, eps, min_weight)


STRATEGIES = {
    "single-linkage": (_sl, ("delta",)),
    "dbscan": (_db, ("eps", "min_weight")),
}
