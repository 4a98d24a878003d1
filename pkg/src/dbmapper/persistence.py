"""Extended persistence of graphs, bottleneck distance and a Reeb-graph oracle."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components, maximum_bipartite_matching

from .errors import InputFormatError, InvalidParameterError
from .geometry import LensMap, PointCloud, rips_edges

KINDS = ("Ord0", "Ext0", "Ext1", "Rel1")


@dataclass(frozen=True)
class PersistencePoint:
    birth: float
    death: float
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown diagram point kind {self.kind!r}")

    @property
    def persistence(self) -> float:
        return abs(self.death - self.birth)


@dataclass(frozen=True)
class PersistenceDiagram:
    points: tuple[PersistencePoint, ...]

    def __post_init__(self):
        pts = tuple(sorted(self.points, key=lambda p: (p.kind, p.birth, p.death)))
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def of_kind(self, kind: str) -> np.ndarray:
        return np.array([(p.birth, p.death) for p in self.points if p.kind == kind],
                        dtype=float).reshape(-1, 2)

    def counts(self) -> dict[str, int]:
        return {k: sum(p.kind == k for p in self.points) for k in KINDS}

    def to_jsonl(self) -> str:
        return "".join(json.dumps({"birth": p.birth, "death": p.death, "kind": p.kind}) + "\n"
                       for p in self.points)

    @classmethod
    def from_jsonl(cls, text: str) -> "PersistenceDiagram":
        pts = []
        for ln, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                pts.append(PersistencePoint(float(d["birth"]), float(d["death"]), d["kind"]))
            except (ValueError, KeyError, TypeError) as exc:
                raise InputFormatError(f"diagram line {ln}: {exc}") from None
        return cls(tuple(pts))

    def write(self, path) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def read(cls, path) -> "PersistenceDiagram":
        return cls.from_jsonl(Path(path).read_text())


@dataclass(frozen=True)
class MorseGraph:
    """Abstract (multi)graph with a value per vertex; edges interpolate linearly."""

    f: np.ndarray
    edges: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float).ravel()
        e = np.asarray(self.edges, dtype=np.intp).reshape(-1, 2)
        if not np.all(np.isfinite(f)):
            raise InvalidParameterError("vertex values must be finite")
        if e.size and (e.min() < 0 or e.max() >= f.size):
            raise InvalidParameterError("edge endpoint out of range")
        if e.size and np.any(e[:, 0] == e[:, 1]):
            raise InvalidParameterError("self-loops are not supported")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "edges", e)

    @property
    def n_vertices(self) -> int:
        return self.f.size

    def betti(self) -> tuple[int, int]:
        n = self.n_vertices
        if n == 0:
            return 0, 0
        e = self.edges
        adj = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
        b0 = int(connected_components(adj, directed=False)[0])
        return b0, int(len(e) - n + b0)


def _as_morse(graph, f=None) -> MorseGraph:
    if isinstance(graph, MorseGraph):
        return graph if f is None else MorseGraph(f, graph.edges)
    if hasattr(graph, "vertices") and hasattr(graph, "edge_array"):
        return MorseGraph(graph.fbar if f is None else f, graph.edge_array())
    n, edges = graph
    if f is None:
        raise InvalidParameterError("vertex values are required for an abstract graph")
    if len(f) != n:
        raise InvalidParameterError("need one value per vertex")
    return MorseGraph(f, edges)


# ------------------------------------------------------ extended persistence

_VERT, _EDGE, _APEX, _CONE_EDGE, _CONE_TRI = range(5)


def extended_persistence(graph, f=None, keep_zero: bool = False) -> PersistenceDiagram:
    """Extended persistence diagram of a graph with piecewise-linear values.

    ``graph`` is a MapperGraph (values default to fbar), a MorseGraph, or a
    pair ``(n_vertices, edges)`` with ``f`` given. The extended filtration is
    coned off: an apex enters first, then the sublevel filtration, then the
    cone over superlevel sets in decreasing order. Ties in value are broken
    by vertex index. Ord0 and Rel1 points of zero persistence are dropped
    unless ``keep_zero``.
    """
    g = _as_morse(graph, f)
    fv = g.f
    n = fv.size
    E = g.edges
    m = len(E)
    rank = np.empty(n, dtype=np.intp)
    rank[np.lexsort((np.arange(n), fv))] = np.arange(n)
    if m:
        ra, rb = rank[E[:, 0]], rank[E[:, 1]]
        hi_r, lo_r = np.maximum(ra, rb), np.minimum(ra, rb)
    else:
        hi_r = lo_r = np.empty(0, dtype=np.intp)

    # (sort key, type, object id)
    asc = [((int(rank[v]), 0, 0, v), _VERT, v) for v in range(n)]
    asc += [((int(hi_r[e]), 1, int(lo_r[e]), e), _EDGE, e) for e in range(m)]
    desc = [((-int(rank[v]), 0, 0, v), _CONE_EDGE, v) for v in range(n)]
    desc += [((-int(lo_r[e]), 1, -int(hi_r[e]), e), _CONE_TRI, e) for e in range(m)]
    asc.sort()
    desc.sort()
    cells = [(_APEX, -1)] + [(t, o) for _, t, o in asc] + [(t, o) for _, t, o in desc]

    pos_vert = np.empty(n, dtype=np.intp)
    pos_edge = np.empty(m, dtype=np.intp)
    pos_cone = np.empty(n, dtype=np.intp)
    for p, (t, o) in enumerate(cells):
        if t == _VERT:
            pos_vert[o] = p
        elif t == _EDGE:
            pos_edge[o] = p
        elif t == _CONE_EDGE:
            pos_cone[o] = p

    def boundary(t, o):
        if t == _EDGE:
            return {int(pos_vert[E[o, 0]]), int(pos_vert[E[o, 1]])}
        if t == _CONE_EDGE:
            return {0, int(pos_vert[o])}
        if t == _CONE_TRI:
            return {int(pos_edge[o]), int(pos_cone[E[o, 0]]), int(pos_cone[E[o, 1]])}
        return set()

    def value(t, o):
        if t in (_VERT, _CONE_EDGE):
            return float(fv[o])
        if t == _EDGE:
            return float(max(fv[E[o, 0]], fv[E[o, 1]]))
        if t == _CONE_TRI:
            return float(min(fv[E[o, 0]], fv[E[o, 1]]))
        return float("nan")

    pivot_of: dict[int, int] = {}
    cols: dict[int, set] = {}
    pairs = []
    for j, (t, o) in enumerate(cells):
        col = boundary(t, o)
        while col:
            low = max(col)
            k = pivot_of.get(low)
            if k is None:
                break
            col ^= cols[k]
        if col:
            low = max(col)
            pivot_of[low] = j
            cols[j] = col
            pairs.append((low, j))

    paired = set(pivot_of) | set(pivot_of.values())
    unpaired = [p for p in range(len(cells)) if p not in paired]
    if unpaired != [0]:
        raise AssertionError(f"extended persistence left cells unpaired: {unpaired[:5]}")

    kind_of = {(_VERT, _EDGE): "Ord0", (_VERT, _CONE_EDGE): "Ext0",
               (_EDGE, _CONE_TRI): "Ext1", (_CONE_EDGE, _CONE_TRI): "Rel1"}
    pts = []
    for i, j in pairs:
        (ti, oi), (tj, oj) = cells[i], cells[j]
        kind = kind_of[(ti, tj)]
        b, d = value(ti, oi), value(tj, oj)
        if not keep_zero and kind in ("Ord0", "Rel1") and b == d:
            continue
        pts.append(PersistencePoint(b, d, kind))
    return PersistenceDiagram(tuple(pts))


def mapper_diagram(g) -> PersistenceDiagram:
    """Diagram of a Mapper graph under its midpoint function fbar."""
    return extended_persistence(g)


# ------------------------------------------------------------- bottleneck

def _linf(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.maximum(np.abs(a[:, None, 0] - b[None, :, 0]),
                      np.abs(a[:, None, 1] - b[None, :, 1]))


def _perfect_at(C: np.ndarray, da: np.ndarray, db: np.ndarray, t: float) -> bool:
    """Is there a perfect matching of the diagonal-augmented graph at cost <= t?"""
    n1, n2 = C.shape
    rows, cols = [], []
    r, c = np.nonzero(C <= t)
    rows.append(r)
    cols.append(c)
    i = np.flatnonzero(da <= t)        # a-point to its own diagonal copy
    rows.append(i)
    cols.append(n2 + i)
    j = np.flatnonzero(db <= t)        # diagonal copy of b-point to that point
    rows.append(n1 + j)
    cols.append(j)
    rr, cc = np.meshgrid(np.arange(n2), np.arange(n1), indexing="ij")
    rows.append(n1 + rr.ravel())       # diagonal to diagonal is free
    cols.append(n2 + cc.ravel())
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    size = n1 + n2
    graph = csr_matrix((np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(size, size))
    match = maximum_bipartite_matching(graph, perm_type="column")
    return bool(np.all(match >= 0))


def bottleneck_points(a, b) -> float:
    """Exact bottleneck distance between two single-kind point sets (k, 2)."""
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    da = np.abs(a[:, 1] - a[:, 0]) / 2
    db = np.abs(b[:, 1] - b[:, 0]) / 2
    if a.shape[0] == 0 and b.shape[0] == 0:
        return 0.0
    C = _linf(a, b)
    cand = np.unique(np.concatenate([[0.0], C.ravel(), da, db]))
    lo, hi = 0, cand.size - 1
    # the largest diagonal cost is always feasible
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_at(C, da, db, cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cand[lo])


def bottleneck(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """Bottleneck distance; points only match points of the same kind."""
    return max(bottleneck_points(d1.of_kind(k), d2.of_kind(k)) for k in KINDS)


# ----------------------------------------------------------- diagram gap

def _max_matching(A: np.ndarray, B: np.ndarray, tol: float) -> int:
    if A.shape[0] == 0 or B.shape[0] == 0:
        return 0
    ok = _linf(A, B) <= tol
    graph = csr_matrix(ok.astype(np.int8))
    match = maximum_bipartite_matching(graph, perm_type="column")
    return int(np.sum(match >= 0))


def diagram_gap(reference: PersistenceDiagram, candidate: PersistenceDiagram,
                tol: float = 1e-9) -> float:
    """Largest persistence among reference points left unmatched by the
    candidate, minimised over one-to-one same-kind matchings in which
    matched points agree to within ``tol`` in both coordinates."""
    gap = 0.0
    for kind in KINDS:
        ref = reference.of_kind(kind)
        if ref.shape[0] == 0:
            continue
        cand = candidate.of_kind(kind)
        pers = np.abs(ref[:, 1] - ref[:, 0])
        order = np.argsort(-pers, kind="stable")
        ref, pers = ref[order], pers[order]
        # largest prefix (by persistence) that can be matched entirely
        lo, hi = 0, ref.shape[0]
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if _max_matching(ref[:mid], cand, tol) == mid:
                lo = mid
            else:
                hi = mid - 1
        if lo < ref.shape[0]:
            gap = max(gap, float(pers[lo]))
    return gap


# ------------------------------------------------------------ Reeb oracle

# Level-set sweeps allocate a few machine words per (edge, rank gap) crossing.
MAX_CROSSINGS = 20_000_000

def _flag_triangles(n: int, edges: np.ndarray) -> np.ndarray:
    """All triangles (i < j < k) of the flag complex of an edge list."""
    if edges.size == 0:
        return np.empty((0, 3), dtype=np.intp)
    nbr = [[] for _ in range(n)]
    for i, j in edges.tolist():
        nbr[i].append(j)
    nbrs = [set(x) for x in nbr]
    out = []
    for i, j in edges.tolist():
        common = nbrs[i] & nbrs[j]
        out.extend((i, j, k) for k in common)
    if not out:
        return np.empty((0, 3), dtype=np.intp)
    return np.array(sorted(out), dtype=np.intp)


def _level_set_components(edge_lo, edge_hi, links, link_lo, link_hi, n_gaps):
    """Component label of every (edge, gap) crossing, gap by gap.

    Returns (gap_of, edge_of, comp_of, n_comp_total) listing every crossing.
    """
    spans = edge_hi - edge_lo
    edge_of = np.repeat(np.arange(edge_lo.size), spans)
    gap_of = np.repeat(edge_lo, spans) + (np.arange(spans.sum())
                                          - np.repeat(np.cumsum(spans) - spans, spans))
    order = np.lexsort((edge_of, gap_of))
    gap_of, edge_of = gap_of[order], edge_of[order]

    lspan = link_hi - link_lo
    l_of = np.repeat(np.arange(link_lo.size), lspan)
    lg = np.repeat(link_lo, lspan) + (np.arange(lspan.sum())
                                      - np.repeat(np.cumsum(lspan) - lspan, lspan))
    lorder = np.argsort(lg, kind="stable")
    l_of, lg = l_of[lorder], lg[lorder]

    comp_of = np.empty(edge_of.size, dtype=np.intp)
    e_start = np.searchsorted(gap_of, np.arange(n_gaps + 1))
    l_start = np.searchsorted(lg, np.arange(n_gaps + 1))
    local = np.full(edge_lo.size, -1, dtype=np.intp)
    offset = 0
    for g in range(n_gaps):
        es = edge_of[e_start[g]:e_start[g + 1]]
        k = es.size
        if k == 0:
            continue
        local[es] = np.arange(k)
        ls = links[l_of[l_start[g]:l_start[g + 1]]]
        if ls.size:
            adj = coo_matrix((np.ones(len(ls)), (local[ls[:, 0]], local[ls[:, 1]])),
                             shape=(k, k))
            nc, lab = connected_components(adj, directed=False)
        else:
            nc, lab = k, np.arange(k)
        comp_of[e_start[g]:e_start[g + 1]] = offset + lab
        offset += nc
        local[es] = -1
    return gap_of, edge_of, comp_of, offset


def reeb_graph_of_complex(values, edges, triangles=None) -> MorseGraph:
    """Reeb graph of a piecewise-linear function on a simplicial 2-complex.

    Between consecutive vertex values the level set is a graph whose nodes
    are the crossing edges and whose links come from crossing triangles; its
    components are the Reeb arcs. Arcs are glued at each vertex level and
    regular nodes (one arc below, one above) are contracted. Equal values
    are ordered by vertex index.
    """
    f = np.asarray(values, dtype=float).ravel()
    n = f.size
    edges = np.asarray(edges, dtype=np.intp).reshape(-1, 2)
    if triangles is None:
        triangles = _flag_triangles(n, np.sort(edges, axis=1))
    triangles = np.asarray(triangles, dtype=np.intp).reshape(-1, 3)
    order = np.lexsort((np.arange(n), f))
    rank = np.empty(n, dtype=np.intp)
    rank[order] = np.arange(n)

    er = np.sort(rank[edges], axis=1) if edges.size else np.empty((0, 2), dtype=np.intp)
    elo, ehi = er[:, 0], er[:, 1]
    crossings = int(np.sum(ehi - elo))
    if crossings > MAX_CROSSINGS:
        raise InvalidParameterError(
            f"Reeb sweep needs {crossings} edge/level crossings (limit {MAX_CROSSINGS}); "
            "use a smaller delta or fewer points")
    key = {(int(a), int(b)): i for i, (a, b) in enumerate(er.tolist())}

    links, llo, lhi = [], [], []
    for tri in triangles.tolist():
        r0, r1, r2 = sorted(int(rank[v]) for v in tri)
        e01, e02, e12 = key[(r0, r1)], key[(r0, r2)], key[(r1, r2)]
        if r1 > r0:
            links.append((e01, e02))
            llo.append(r0)
            lhi.append(r1)
        if r2 > r1:
            links.append((e02, e12))
            llo.append(r1)
            lhi.append(r2)
    links = np.array(links, dtype=np.intp).reshape(-1, 2)
    llo = np.array(llo, dtype=np.intp)
    lhi = np.array(lhi, dtype=np.intp)

    gap_of, edge_of, comp_of, n_comp = _level_set_components(elo, ehi, links, llo, lhi,
                                                             max(n - 1, 0))
    # endpoint ids: rank-vertex r -> r, bottom of arc c -> n + 2c, top -> n + 2c + 1
    glue_a, glue_b = [], []
    starts = elo[edge_of] == gap_of
    glue_a.append(n + 2 * comp_of[starts])
    glue_b.append(gap_of[starts])
    ends = ehi[edge_of] == gap_of + 1
    glue_a.append(n + 2 * comp_of[ends] + 1)
    glue_b.append(gap_of[ends] + 1)
    # the same edge in consecutive gaps continues an arc through a level
    idx = np.lexsort((gap_of, edge_of))
    e_s, g_s, c_s = edge_of[idx], gap_of[idx], comp_of[idx]
    cont = (e_s[1:] == e_s[:-1]) & (g_s[1:] == g_s[:-1] + 1)
    glue_a.append(n + 2 * c_s[1:][cont])
    glue_b.append(n + 2 * c_s[:-1][cont] + 1)
    glue_a = np.concatenate(glue_a)
    glue_b = np.concatenate(glue_b)
    total = n + 2 * n_comp
    adj = coo_matrix((np.ones(glue_a.size), (glue_a, glue_b)), shape=(total, total))
    _, cls = connected_components(adj, directed=False)

    # node level: every class sits at one vertex level
    level = np.empty(total, dtype=np.intp)
    level[:n] = np.arange(n)
    comp_gap = np.empty(n_comp, dtype=np.intp)
    comp_gap[comp_of] = gap_of
    level[n::2] = comp_gap
    level[n + 1::2] = comp_gap + 1
    node_ids, node_of = np.unique(cls, return_inverse=True)
    node_level = np.empty(node_ids.size, dtype=np.intp)
    node_level[node_of] = level
    arcs = np.stack([node_of[n + 2 * np.arange(n_comp)],
                     node_of[n + 2 * np.arange(n_comp) + 1]], axis=1)
    return _contract_regular(f[order][node_level], arcs)


def _contract_regular(vals: np.ndarray, arcs: np.ndarray) -> MorseGraph:
    """Remove nodes with exactly one arc below and one above."""
    k = vals.size
    down = [[] for _ in range(k)]  # arcs whose top is this node
    up = [[] for _ in range(k)]
    lo_end = arcs[:, 0].tolist()
    hi_end = arcs[:, 1].tolist()
    for a in range(len(lo_end)):
        up[lo_end[a]].append(a)
        down[hi_end[a]].append(a)
    alive_arc = [True] * len(lo_end)
    alive_node = [True] * k
    for v in range(k):
        if len(down[v]) == 1 and len(up[v]) == 1:
            a, b = down[v][0], up[v][0]
            if a == b:
                continue
            hi_node = hi_end[b]
            # arc a now runs from its old bottom to the top of arc b; retire arc b
            hi_end[a] = hi_node
            down[hi_node] = [a if x == b else x for x in down[hi_node]]
            alive_arc[b] = False
            alive_node[v] = False
    keep = np.flatnonzero(alive_node)
    remap = np.full(k, -1, dtype=np.intp)
    remap[keep] = np.arange(keep.size)
    out = [(remap[lo_end[a]], remap[hi_end[a]]) for a in range(len(lo_end)) if alive_arc[a]]
    return MorseGraph(vals[keep], np.array(out, dtype=np.intp).reshape(-1, 2))


def reeb_oracle(cloud: PointCloud, lens: LensMap, delta: float) -> MorseGraph:
    """Exact Reeb graph of the lens on the Rips complex at scale ``delta``."""
    if not delta > 0:
        raise InvalidParameterError(f"delta must be positive, got {delta}")
    lens.check_matches(cloud)
    if lens.hi == lens.lo:
        raise InvalidParameterError("lens needs at least two distinct values")
    return reeb_graph_of_complex(lens.values, rips_edges(cloud, delta))


def diagram_from_points(items: Iterable[tuple[float, float, str]]) -> PersistenceDiagram:
    return PersistenceDiagram(tuple(PersistencePoint(float(b), float(d), k)
                                    for b, d, k in items))
