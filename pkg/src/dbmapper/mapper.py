"""Mapper graph assembly from kerneled cover sets, plus graph diagnostics and export."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .cluster import Clusterer
from .cover import GomicCover
from .density import WidthScaler, multipliers_for
from .errors import InvalidParameterError
from .geometry import LensMap, PointCloud, rips_edges
from .kernel import KernelSpec, KerneledSet, build_kerneled_set

WEIGHT_MODES = ("count", "kernel")


@dataclass(frozen=True)
class MapperVertex:
    interval_index: int
    cluster_id: int
    members: np.ndarray
    fbar: float

    @property
    def label(self) -> str:
        return f"{self.interval_index}:{self.cluster_id}"


@dataclass(frozen=True)
class MapperEdge:
    a: int  # vertex positions, a in the lower interval
    b: int
    weight: float
    multiplicity: int = 1


@dataclass(eq=False)
class MapperGraph:
    """Mapper (multi)graph. Vertices are ordered by (interval_index, cluster_id)."""

    vertices: list[MapperVertex]
    edges: list[MapperEdge]
    is_multigraph: bool = False
    info: dict = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def fbar(self) -> np.ndarray:
        return np.array([v.fbar for v in self.vertices], dtype=float)

    def edge_array(self) -> np.ndarray:
        if not self.edges:
            return np.empty((0, 2), dtype=np.intp)
        return np.array([(e.a, e.b) for e in self.edges], dtype=np.intp)

    def canonical(self) -> tuple:
        """Hashable, order-fixed description used for exact comparisons."""
        verts = tuple((v.interval_index, v.cluster_id, tuple(int(m) for m in v.members),
                       float(v.fbar)) for v in self.vertices)
        edges = tuple(sorted((e.a, e.b, float(e.weight), int(e.multiplicity))
                             for e in self.edges))
        return verts, edges, bool(self.is_multigraph)

    def __eq__(self, other):
        if not isinstance(other, MapperGraph):
            return NotImplemented
        return self.canonical() == other.canonical()

    def betti(self) -> tuple[int, int]:
        return graph_betti(self.n_vertices, self.edge_array())

    def slice_counts(self, n_intervals: int | None = None) -> np.ndarray:
        m = n_intervals if n_intervals is not None else (
            1 + max((v.interval_index for v in self.vertices), default=-1))
        out = np.zeros(m, dtype=int)
        for v in self.vertices:
            out[v.interval_index] += 1
        return out

    def summary(self) -> dict:
        b0, b1 = self.betti()
        return {"V": self.n_vertices, "E": self.n_edges, "beta0": b0, "beta1": b1}

    def to_networkx(self):
        import networkx as nx

        g = nx.MultiGraph() if self.is_multigraph else nx.Graph()
        for v in self.vertices:
            g.add_node(v.label, interval=v.interval_index, cluster=v.cluster_id,
                       fbar=float(v.fbar), size=int(v.members.size))
        for e in self.edges:
            g.add_edge(self.vertices[e.a].label, self.vertices[e.b].label,
                       weight=float(e.weight), multiplicity=int(e.multiplicity))
        return g


def graph_betti(n_vertices: int, edges) -> tuple[int, int]:
    """(components, cycle rank) of a (multi)graph given as an edge array."""
    edges = np.asarray(edges, dtype=np.intp).reshape(-1, 2)
    if n_vertices == 0:
        return 0, 0
    adj = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])),
                     shape=(n_vertices, n_vertices))
    b0 = connected_components(adj, directed=False)[0]
    return int(b0), int(len(edges) - n_vertices + b0)


def _midrange(vals: np.ndarray) -> float:
    lo, hi = float(vals.min()), float(vals.max())
    return lo + (hi - lo) / 2


def _split_by_linkage(points: np.ndarray, radius: float) -> np.ndarray:
    if len(points) == 1:
        return np.zeros(1, dtype=np.intp)
    pairs = cKDTree(points).query_pairs(r=radius, output_type="ndarray")
    m = len(points)
    if pairs.size == 0:
        return np.arange(m)
    adj = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(m, m))
    return connected_components(adj, directed=False)[1]


def assemble_graph(cloud: PointCloud, lens: LensMap, member_sets: Sequence[np.ndarray],
                   clusterer: Clusterer, *, kernel_weights: Sequence[np.ndarray] | None = None,
                   weight_mode: str = "count", multinerve: bool = False,
                   use_kernel_weights: bool = False) -> MapperGraph:
    """Cluster every cover set and connect clusters of consecutive sets.

    ``member_sets[i]`` are the point indices of cover set i in interval order;
    ``kernel_weights[i]`` the matching kernel values (needed for
    ``weight_mode='kernel'`` and for weighted clustering). With
    ``multinerve`` one parallel edge is emitted per linkage component of the
    points two clusters share.
    """
    if weight_mode not in WEIGHT_MODES:
        raise InvalidParameterError(f"weight_mode must be one of {WEIGHT_MODES}")
    if weight_mode == "kernel" and kernel_weights is None:
        raise InvalidParameterError("weight_mode='kernel' needs kernel weights")
    pts, t = cloud.points, lens.values
    n = cloud.n

    vertices: list[MapperVertex] = []
    # per slice: dense map point -> vertex position (or -1)
    slot = []
    kval = []
    for i, members in enumerate(member_sets):
        members = np.asarray(members, dtype=np.intp)
        where = np.full(n, -1, dtype=np.intp)
        kv = np.zeros(n)
        if kernel_weights is not None:
            kv[members] = np.asarray(kernel_weights[i], dtype=float)
        if members.size == 0:
            warnings.warn(f"cover set {i} is empty; slice has no vertices", RuntimeWarning)
            slot.append(where)
            kval.append(kv)
            continue
        w = kv[members] if (use_kernel_weights and clusterer.accepts_weights
                            and kernel_weights is not None) else None
        assign = clusterer(pts[members], w)
        if assign.cluster_count == 0:
            warnings.warn(f"slice {i} has no clusters after clustering", RuntimeWarning)
        for c in range(assign.cluster_count):
            mem = members[assign.labels == c]
            where[mem] = len(vertices)
            vertices.append(MapperVertex(i, c, mem, _midrange(t[mem])))
        slot.append(where)
        kval.append(kv)

    edges: list[MapperEdge] = []
    radius = clusterer.linkage_radius
    for i in range(len(member_sets) - 1):
        a_of, b_of = slot[i], slot[i + 1]
        shared = np.flatnonzero((a_of >= 0) & (b_of >= 0))
        if shared.size == 0:
            continue
        if weight_mode == "count":
            contrib = np.ones(shared.size)
        else:
            contrib = np.minimum(kval[i][shared], kval[i + 1][shared])
        pair = np.stack([a_of[shared], b_of[shared]], axis=1)
        keys, inv = np.unique(pair, axis=0, return_inverse=True)
        inv = inv.ravel()
        for q, (a, b) in enumerate(keys.tolist()):
            sel = np.flatnonzero(inv == q)
            if not multinerve:
                edges.append(MapperEdge(a, b, float(contrib[sel].sum()), 1))
                continue
            comp = _split_by_linkage(pts[shared[sel]], radius)
            for c in np.unique(comp):
                edges.append(MapperEdge(a, b, float(contrib[sel[comp == c]].sum()), 1))
    return MapperGraph(vertices, edges, is_multigraph=multinerve)


def build_mapper(cloud: PointCloud, lens: LensMap, cover: GomicCover, spec: KernelSpec,
                 scaler: WidthScaler, clusterer: Clusterer, weight_mode: str = "count", *,
                 k: int = 15, multinerve: bool = False, use_kernel_weights: bool = False,
                 multipliers=None) -> MapperGraph:
    """Density-based Mapper graph.

    Per-point width multipliers come from the inverse lens density (skipped
    when the scaler's sensitivity is 0) unless ``multipliers`` is given.
    ``info`` on the result carries the kerneled sets, multipliers and the
    density profile.
    """
    lens.check_matches(cloud)
    profile = None
    if multipliers is None:
        multipliers, profile = multipliers_for(cloud, lens, k, scaler)
    multipliers = np.asarray(multipliers, dtype=float)
    sets = [build_kerneled_set(lens, iv, spec, multipliers, i)
            for i, iv in enumerate(cover.intervals)]
    g = assemble_graph(cloud, lens, [s.members for s in sets], clusterer,
                       kernel_weights=[s.weights for s in sets], weight_mode=weight_mode,
                       multinerve=multinerve, use_kernel_weights=use_kernel_weights)
    g.info.update(kerneled_sets=sets, multipliers=multipliers, profile=profile,
                  cover=cover)
    return g


def build_pullback_mapper(cloud: PointCloud, lens: LensMap, cover: GomicCover,
                          clusterer: Clusterer, *, multinerve: bool = False) -> MapperGraph:
    """Classical Mapper: cluster the plain pullback of each interval, count weights."""
    sets = [cover.pullback(lens, i) for i in range(len(cover))]
    return assemble_graph(cloud, lens, sets, clusterer, multinerve=multinerve)


def build_coarse_mapper(cloud: PointCloud, lens: LensMap, sets: Sequence[KerneledSet],
                        clusterer: Clusterer) -> MapperGraph:
    """Mapper over the maximally coarse cover of kerneled sets.

    Each coarse set holds every point whose lens value lies in the closed
    span of the corresponding kerneled set's member values.
    """
    t = lens.values
    member_sets = []
    for s in sorted(sets, key=lambda s: s.interval_index):
        vals = t[s.members]
        member_sets.append(np.flatnonzero((t >= vals.min()) & (t <= vals.max())))
    return assemble_graph(cloud, lens, member_sets, clusterer)


def collapse_multigraph(g: MapperGraph) -> MapperGraph:
    """Merge parallel edges: weights summed, multiplicities added."""
    if not g.is_multigraph:
        return g
    merged: dict[tuple[int, int], list] = {}
    for e in g.edges:
        key = (e.a, e.b)
        if key in merged:
            merged[key][0] += e.weight
            merged[key][1] += e.multiplicity
        else:
            merged[key] = [e.weight, e.multiplicity]
    edges = [MapperEdge(a, b, float(w), int(m)) for (a, b), (w, m) in merged.items()]
    return MapperGraph(list(g.vertices), edges, is_multigraph=False, info=dict(g.info))


def find_intersection_crossing_edges(cloud: PointCloud, lens: LensMap, delta: float,
                                     cover: GomicCover) -> np.ndarray:
    """Rips edges (length <= delta) whose lens span contains a whole overlap
    of consecutive cover intervals. Returns an (m, 2) array of index pairs."""
    lens.check_matches(cloud)
    pairs = rips_edges(cloud, delta)
    ovl = np.array([(a, b) for a, b in cover.overlaps() if a < b], dtype=float).reshape(-1, 2)
    if pairs.size == 0 or ovl.size == 0:
        return np.empty((0, 2), dtype=np.intp)
    t = lens.values
    lo = np.minimum(t[pairs[:, 0]], t[pairs[:, 1]])
    hi = np.maximum(t[pairs[:, 0]], t[pairs[:, 1]])
    order = np.argsort(ovl[:, 0], kind="stable")
    starts, ends = ovl[order, 0], ovl[order, 1]
    # smallest overlap end among overlaps starting at or after each position
    suffix_min = np.minimum.accumulate(ends[::-1])[::-1]
    pos = np.searchsorted(starts, lo, side="left")
    hit = pos < len(starts)
    hit[hit] = suffix_min[pos[hit]] <= hi[hit]
    return pairs[hit]


# ---------------------------------------------------------------- export

def to_dot(g: MapperGraph) -> str:
    kind = "graph"
    lines = [f"{kind} mapper {{"]
    for v in g.vertices:
        lines.append(f'  "{v.label}" [label="{v.label}", fbar={v.fbar!r}, '
                     f"size={v.members.size}];")
    for e in g.edges:
        lines.append(f'  "{g.vertices[e.a].label}" -- "{g.vertices[e.b].label}" '
                     f"[weight={e.weight!r}, multiplicity={e.multiplicity}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(g: MapperGraph) -> str:
    doc = {
        "is_multigraph": g.is_multigraph,
        "vertices": [{"id": v.label, "interval": v.interval_index, "cluster": v.cluster_id,
                      "fbar": float(v.fbar), "members": v.members.tolist()}
                     for v in g.vertices],
        "edges": [{"source": g.vertices[e.a].label, "target": g.vertices[e.b].label,
                   "weight": float(e.weight), "multiplicity": int(e.multiplicity)}
                  for e in g.edges],
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def from_json(text: str) -> MapperGraph:
    doc = json.loads(text)
    pos = {}
    verts = []
    for i, v in enumerate(doc["vertices"]):
        pos[v["id"]] = i
        verts.append(MapperVertex(v["interval"], v["cluster"],
                                  np.asarray(v["members"], dtype=np.intp), v["fbar"]))
    edges = [MapperEdge(pos[e["source"]], pos[e["target"]], e["weight"], e["multiplicity"])
             for e in doc["edges"]]
    return MapperGraph(verts, edges, doc["is_multigraph"])


def write_graphml(g: MapperGraph, path) -> None:
    import networkx as nx

    nx.write_graphml(g.to_networkx(), str(path))


def layout_positions(g: MapperGraph, cloud: PointCloud) -> np.ndarray:
    """Mean member position over the first two ambient coordinates."""
    pts = cloud.points
    if pts.shape[1] == 1:
        pts = np.hstack([pts, np.zeros((pts.shape[0], 1))])
    return np.array([pts[v.members, :2].mean(axis=0) for v in g.vertices]).reshape(-1, 2)


def svg_fragment(g: MapperGraph, cloud: PointCloud, x0: float, y0: float, w: float,
                 h: float, bounds=None) -> list[str]:
    """SVG elements drawing ``g`` inside the box (x0, y0, w, h)."""
    xy = layout_positions(g, cloud)
    if bounds is None:
        pts = cloud.points[:, :2] if cloud.dim >= 2 else np.hstack(
            [cloud.points, np.zeros((cloud.n, 1))])
        bounds = (pts.min(axis=0), pts.max(axis=0))
    lo, hi = np.asarray(bounds[0], float), np.asarray(bounds[1], float)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    pad = 0.08
    sx = x0 + w * (pad + (1 - 2 * pad) * (xy[:, 0] - lo[0]) / span[0]) if len(xy) else xy
    sy = y0 + h * (1 - pad - (1 - 2 * pad) * (xy[:, 1] - lo[1]) / span[1]) if len(xy) else xy
    out = []
    for e in g.edges:
        out.append(f'<line x1="{sx[e.a]:.2f}" y1="{sy[e.a]:.2f}" x2="{sx[e.b]:.2f}" '
                   f'y2="{sy[e.b]:.2f}" stroke="#555" stroke-width="1"/>')
    for i, v in enumerate(g.vertices):
        r = 1.5 + min(4.0, np.sqrt(v.members.size) / 4)
        out.append(f'<circle cx="{sx[i]:.2f}" cy="{sy[i]:.2f}" r="{r:.2f}" fill="#1f5fa8">'
                   f"<title>{v.label} fbar={v.fbar:.4g}</title></circle>")
    return out


def to_svg(g: MapperGraph, cloud: PointCloud, size: int = 400) -> str:
    body = svg_fragment(g, cloud, 0, 0, size, size)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
            f'viewBox="0 0 {size} {size}">\n<rect width="100%" height="100%" fill="white"/>\n'
            + "\n".join(body) + "\n</svg>\n")


def export_graph(g: MapperGraph, path, fmt: str | None = None, cloud: PointCloud | None = None):
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    if fmt == "dot":
        path.write_text(to_dot(g))
    elif fmt == "json":
        path.write_text(to_json(g))
    elif fmt == "graphml":
        write_graphml(g, path)
    elif fmt == "svg":
        if cloud is None:
            raise InvalidParameterError("SVG export needs the point cloud for layout")
        path.write_text(to_svg(g, cloud))
    else:
        raise InvalidParameterError(f"unknown graph format {fmt!r}")
