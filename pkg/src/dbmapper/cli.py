"""Command line: pipeline runner, parameter sweeps, verification and emitters.

Exit codes: 0 success, 1 validation or input error, 2 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .cluster import Clusterer
from .cover import GomicCover, data_spaced_cover, kerneled_resolution, morse_spaced_cover
from .density import WidthScaler, compute_density, width_multiplier
from .errors import DBMapperError, InvalidParameterError, VerificationError
from .geometry import (LensMap, PointCloud, hausdorff_estimate, modulus_of_continuity,
                       read_csv, write_csv)
from .kernel import KernelSpec
from .mapper import (MapperGraph, build_mapper, collapse_multigraph, export_graph,
                     find_intersection_crossing_edges, layout_positions)
from .persistence import bottleneck, extended_persistence, reeb_oracle

log = logging.getLogger("dbmapper")

WORKERS_ENV = "DBMAPPER_WORKERS"


@dataclass
class RunConfig:
    input: str | None = None
    lens_column: str | None = None
    cover: str = "morse"
    N: int = 10
    g: float = 0.5
    kernel: str = "square"
    epsilon: float = 0.1
    k: int = 15
    c_max: float = 3.0
    rate_sensitivity: float = 1.0
    clusterer: str = "single-linkage"
    delta: float | None = None
    dbscan_eps: float | None = None
    dbscan_min_weight: float | None = None
    use_kernel_weights: bool = False
    weight_mode: str = "count"
    multinerve: bool = False
    outputs: list = field(default_factory=list)
    manifest: str | None = None

    def validate(self) -> None:
        if self.cover not in ("morse", "data"):
            raise InvalidParameterError(f"cover must be 'morse' or 'data', got {self.cover!r}")
        if int(self.N) != self.N or self.N < 1:
            raise InvalidParameterError(f"N must be a positive integer, got {self.N}")
        KernelSpec(self.kernel, self.epsilon)
        WidthScaler(self.c_max, self.rate_sensitivity)
        if int(self.k) != self.k or self.k < 1:
            raise InvalidParameterError(f"k must be a positive integer, got {self.k}")
        self.make_clusterer()
        if self.weight_mode not in ("count", "kernel"):
            raise InvalidParameterError("weight mode must be 'count' or 'kernel'")
        for p in self.outputs:
            parent = Path(p).parent
            if not parent.exists():
                raise InvalidParameterError(f"output directory {parent} does not exist")

    def make_clusterer(self) -> Clusterer:
        if self.clusterer == "single-linkage":
            if self.delta is None:
                raise InvalidParameterError("single-linkage needs --delta")
            return Clusterer("single-linkage", {"delta": float(self.delta)})
        if self.clusterer == "dbscan":
            if self.dbscan_eps is None or self.dbscan_min_weight is None:
                raise InvalidParameterError("dbscan needs --dbscan-eps and --dbscan-min-weight")
            return Clusterer("dbscan", {"eps": float(self.dbscan_eps),
                                        "min_weight": float(self.dbscan_min_weight)})
        return Clusterer(self.clusterer, {})

    def make_cover(self, lens: LensMap) -> GomicCover:
        if self.cover == "morse":
            return morse_spaced_cover(lens.lo, lens.hi, int(self.N), float(self.g))
        return data_spaced_cover(lens, int(self.N), float(self.g))

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        return cls().merged(load_config(path))

    def merged(self, values: dict) -> "RunConfig":
        known = {f.name for f in fields(self)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise InvalidParameterError(f"unknown configuration keys: {unknown}")
        return replace(self, **values)


def load_config(path) -> dict:
    """Flat JSON object whose keys mirror the long option names."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise InvalidParameterError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict) or any(isinstance(v, dict) for v in doc.values()):
        raise InvalidParameterError(f"config {path} must be a flat JSON object")
    return {k.replace("-", "_"): v for k, v in doc.items()}


# --------------------------------------------------------------- pipeline

def _load(config: RunConfig, cloud=None, lens=None):
    if cloud is not None:
        return cloud, lens
    if config.input is None:
        raise InvalidParameterError("no input: pass --input CSV")
    return read_csv(config.input, config.lens_column)


def run_pipeline(config: RunConfig, cloud: PointCloud | None = None,
                 lens: LensMap | None = None) -> tuple[MapperGraph, dict]:
    """Density, cover, kernel, clustering and graph; writes requested exports.

    Returns the graph and the run manifest (also written when
    ``config.manifest`` is set).
    """
    config.validate()
    cloud, lens = _load(config, cloud, lens)
    lens.check_matches(cloud)
    cover = config.make_cover(lens)
    graph = build_mapper(cloud, lens, cover, KernelSpec(config.kernel, config.epsilon),
                         WidthScaler(config.c_max, config.rate_sensitivity),
                         config.make_clusterer(), config.weight_mode, k=int(config.k),
                         multinerve=config.multinerve,
                         use_kernel_weights=config.use_kernel_weights)
    profile = graph.info["profile"]
    sets = graph.info["kerneled_sets"]
    nonempty = [s for s in sets if not s.is_empty]
    simple = collapse_multigraph(graph)
    b0, b1 = simple.betti()
    manifest = {
        "version": __version__,
        "parameters": {k: v for k, v in asdict(config).items() if k not in ("outputs", "manifest")},
        "n_points": cloud.n,
        "dim": cloud.dim,
        "lens_range": [lens.lo, lens.hi],
        "density": None if profile is None else {"mu": profile.mean_mu,
                                                 "sigma": profile.std_sigma},
        "cover": cover.to_dict(),
        "cover_resolution": cover.resolution,
        "kerneled_resolution": kerneled_resolution(nonempty, lens) if nonempty else None,
        "empty_sets": [s.interval_index for s in sets if s.is_empty],
        "graph": {"V": graph.n_vertices, "E": graph.n_edges,
                  "is_multigraph": graph.is_multigraph, "beta0": b0, "beta1": b1},
        "outputs": list(config.outputs),
    }
    for out in config.outputs:
        export_graph(graph, out, cloud=cloud)
    if config.manifest:
        Path(config.manifest).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return graph, manifest


# ------------------------------------------------------------------ sweep

@dataclass
class SweepReport:
    N_values: list
    g_values: list
    expected: tuple
    modes: dict            # mode name -> rate sensitivity
    cells: list            # one dict per (mode, N, g), ordered by mode then grid index
    parameters: dict = field(default_factory=dict)

    def cell(self, mode: str, N, g) -> dict:
        for c in self.cells:
            if c["mode"] == mode and c["N"] == N and c["g"] == g:
                return c
        raise KeyError((mode, N, g))

    def correct_count(self, mode: str) -> int:
        return sum(bool(c["correct"]) for c in self.cells if c["mode"] == mode)

    def table(self, mode: str) -> str:
        rows = [f"{'N/g':>5} " + " ".join(f"{g:>7}" for g in self.g_values)]
        for N in self.N_values:
            marks = []
            for g in self.g_values:
                c = self.cell(mode, N, g)
                if c["error"]:
                    marks.append(f"{'err':>7}")
                else:
                    s = c["summary"]
                    marks.append(f"{s['beta0']},{s['beta1']}{'*' if c['correct'] else ' '}".rjust(7))
            rows.append(f"{N:>5} " + " ".join(marks))
        return "\n".join(rows)

    def to_dict(self, include_runtime: bool = True) -> dict:
        cells = []
        for c in self.cells:
            c = {k: v for k, v in c.items() if k != "layout"}
            if not include_runtime:
                c.pop("runtime_ms", None)
            cells.append(c)
        return {"N_values": list(self.N_values), "g_values": list(self.g_values),
                "expected": list(self.expected), "modes": self.modes,
                "correct_counts": {m: self.correct_count(m) for m in self.modes},
                "parameters": self.parameters, "cells": cells}

    def to_json(self, include_runtime: bool = True) -> str:
        return json.dumps(self.to_dict(include_runtime), indent=1, sort_keys=True) + "\n"

    def to_svg(self, cell_size: int = 120) -> str:
        """Grids of laid-out graphs, one per mode; correct cells boxed in green."""
        nr, nc = len(self.N_values), len(self.g_values)
        head, gap = 30, 40
        width = len(self.modes) * (nc * cell_size + gap) + gap
        height = nr * cell_size + head + 20
        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
               f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
               '<rect width="100%" height="100%" fill="white"/>']
        for m_i, mode in enumerate(self.modes):
            x_base = gap + m_i * (nc * cell_size + gap)
            out.append(f'<text x="{x_base}" y="18">{mode}: '
                       f'{self.correct_count(mode)}/{nr * nc} correct</text>')
            for r, N in enumerate(self.N_values):
                for q, g in enumerate(self.g_values):
                    c = self.cell(mode, N, g)
                    x0, y0 = x_base + q * cell_size, head + r * cell_size
                    stroke = "#1a9a1a" if c["correct"] else "#cccccc"
                    sw = 3 if c["correct"] else 1
                    out.append(f'<rect x="{x0 + 2}" y="{y0 + 2}" width="{cell_size - 4}" '
                               f'height="{cell_size - 4}" fill="none" stroke="{stroke}" '
                               f'stroke-width="{sw}"><title>N={N} g={g}</title></rect>')
                    lay = c.get("layout")
                    if lay:
                        out.extend(_layout_svg(lay, x0 + 6, y0 + 6, cell_size - 12))
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _layout_svg(lay: dict, x0: float, y0: float, size: float) -> list[str]:
    xy = np.asarray(lay["xy"], dtype=float).reshape(-1, 2)
    if xy.size == 0:
        return []
    lo, hi = np.asarray(lay["lo"]), np.asarray(lay["hi"])
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    sx = x0 + size * (xy[:, 0] - lo[0]) / span[0]
    sy = y0 + size * (1 - (xy[:, 1] - lo[1]) / span[1])
    out = [f'<line x1="{sx[a]:.1f}" y1="{sy[a]:.1f}" x2="{sx[b]:.1f}" y2="{sy[b]:.1f}" '
           f'stroke="#666" stroke-width="0.8"/>' for a, b in lay["edges"]]
    out += [f'<circle cx="{x:.1f}" cy="{y:.1f}" r="1.8" fill="#1f5fa8"/>' for x, y in zip(sx, sy)]
    return out


def _sweep_cell(args):
    config, mode, N, g, cloud, lens, expected = args
    t0 = time.perf_counter()
    cell = {"mode": mode, "N": N, "g": g, "error": None, "summary": None, "correct": False}
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            graph, _ = run_pipeline(replace(config, N=N, g=g, outputs=[], manifest=None),
                                    cloud, lens)
        simple = collapse_multigraph(graph)
        cell["summary"] = simple.summary()
        cell["correct"] = tuple(simple.betti()) == tuple(expected)
        pts = cloud.points if cloud.dim >= 2 else np.hstack([cloud.points, np.zeros((cloud.n, 1))])
        cell["layout"] = {"xy": layout_positions(simple, cloud).tolist(),
                          "edges": simple.edge_array().tolist(),
                          "lo": pts[:, :2].min(axis=0).tolist(),
                          "hi": pts[:, :2].max(axis=0).tolist()}
    except DBMapperError as exc:
        cell["error"] = f"{type(exc).__name__}: {exc}"
    cell["runtime_ms"] = round(1000 * (time.perf_counter() - t0), 3)
    return cell


def worker_count(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return default
    try:
        n = int(raw)
    except ValueError:
        raise InvalidParameterError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise InvalidParameterError(f"{WORKERS_ENV} must be >= 1")
    return n


def sweep_grid(config: RunConfig, N_values, g_values, expected, cloud=None, lens=None,
               workers: int | None = None, density_sensitivity: float | None = None) -> SweepReport:
    """Run the pipeline on every (N, g) cell in standard mode (sensitivity 0)
    and density mode. A cell is correct when the Betti numbers of the
    collapsed graph equal ``expected``. Cell failures are recorded and the
    sweep continues."""
    N_values, g_values = list(N_values), list(g_values)
    if not N_values:
        raise InvalidParameterError("sweep needs at least one N value")
    if not g_values:
        raise InvalidParameterError("sweep needs at least one g value")
    if len(expected) != 2:
        raise InvalidParameterError("expected Betti numbers must be a pair (beta0, beta1)")
    config.validate()
    cloud, lens = _load(config, cloud, lens)
    s_dens = density_sensitivity if density_sensitivity is not None else (
        config.rate_sensitivity if config.rate_sensitivity > 0 else 1.0)
    modes = {"standard": 0.0, "density": float(s_dens)}
    jobs = [(replace(config, rate_sensitivity=s), mode, N, g, cloud, lens, tuple(expected))
            for mode, s in modes.items() for N in N_values for g in g_values]
    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_sweep_cell, jobs))   # map keeps grid order
    else:
        cells = [_sweep_cell(j) for j in jobs]
    params = {k: v for k, v in asdict(config).items()
              if k not in ("outputs", "manifest", "N", "g", "rate_sensitivity")}
    return SweepReport(N_values, g_values, tuple(expected), modes, cells, params)


# ----------------------------------------------------------------- verify

def verify_bound(config: RunConfig, delta: float, cloud=None, lens=None,
                 reference: PointCloud | None = None) -> dict:
    """Bottleneck distance between the density-based Mapper (single linkage
    at ``delta``) and the Reeb oracle, against r + 2 omega(delta)."""
    cfg = replace(config, clusterer="single-linkage", delta=delta, outputs=[], manifest=None)
    cloud, lens = _load(cfg, cloud, lens)
    graph, _ = run_pipeline(cfg, cloud, lens)
    cover = graph.info["cover"]
    r = kerneled_resolution(graph.info["kerneled_sets"], lens)
    omega = modulus_of_continuity(cloud, lens, delta)
    d_mapper = extended_persistence(graph)
    d_oracle = extended_persistence(reeb_oracle(cloud, lens, delta))
    dist = bottleneck(d_oracle, d_mapper)
    crossing = find_intersection_crossing_edges(cloud, lens, delta, cover)
    out = {"r": r, "omega": omega, "bound": r + 2 * omega, "bottleneck": dist,
           "intersection_crossing_edges": int(len(crossing)),
           "pass": bool(dist <= r + 2 * omega + 1e-9)}
    if reference is not None:
        dh = hausdorff_estimate(cloud, reference)
        out["hausdorff"] = dh
        out["sampling_ok"] = bool(4 * dh <= delta)
    return out


# -------------------------------------------------------------------- CLI

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _bool(s: str) -> bool:
    low = s.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {s!r}")


def _floats(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _ints(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def _pipeline_args(p: argparse.ArgumentParser) -> None:
    # every default is None so config-file values survive unless a flag is given
    p.add_argument("--config", help="flat JSON file of option values")
    p.add_argument("--input", help="CSV with header; lens column 'lens' or last")
    p.add_argument("--lens-column")
    p.add_argument("--cover", choices=["morse", "data"])
    p.add_argument("--N", type=int, help="number of cover intervals")
    p.add_argument("--g", type=float, help="overlap parameter")
    p.add_argument("--kernel", choices=["square", "gaussian"])
    p.add_argument("--epsilon", type=float, help="kernel threshold")
    p.add_argument("--k", type=int, help="neighbours for the density estimate")
    p.add_argument("--c-max", type=float)
    p.add_argument("--rate-sensitivity", type=float)
    p.add_argument("--clusterer", choices=["single-linkage", "dbscan"])
    p.add_argument("--delta", type=float)
    p.add_argument("--dbscan-eps", type=float)
    p.add_argument("--dbscan-min-weight", type=float)
    p.add_argument("--use-kernel-weights", type=_bool)
    p.add_argument("--weight-mode", choices=["count", "kernel"])
    p.add_argument("--multinerve", type=_bool)


def _config_from(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if getattr(args, "config", None) else RunConfig()
    names = {f.name for f in fields(RunConfig)}
    flags = {k: v for k, v in vars(args).items() if k in names and v is not None}
    return cfg.merged(flags)


def _data_from(args, cfg: RunConfig):
    if getattr(args, "synth", None):
        from .synthgen import SynthSpec, gen_genus1, gen_three_component

        gen = {"genus1": gen_genus1, "three-component": gen_three_component}[args.synth]
        d = gen(SynthSpec(seed=args.seed))
        return d.cloud, d.lens
    return _load(cfg)


def cmd_run(args) -> int:
    cfg = _config_from(args)
    if args.out:
        cfg = replace(cfg, outputs=list(args.out))
    if args.manifest:
        cfg = replace(cfg, manifest=args.manifest)
    graph, manifest = run_pipeline(cfg)
    print(json.dumps(manifest["graph"], sort_keys=True))
    return 0


def cmd_sweep(args) -> int:
    cfg = _config_from(args)
    cloud, lens = _data_from(args, cfg)
    report = sweep_grid(cfg, args.N_values, args.g_values, tuple(args.expected), cloud, lens,
                        workers=args.workers)
    if args.report:
        Path(args.report).write_text(report.to_json())
    if args.svg:
        Path(args.svg).write_text(report.to_svg())
    for mode in report.modes:
        print(f"{mode}: {report.correct_count(mode)}/{len(args.N_values) * len(args.g_values)} correct")
        print(report.table(mode))
    return 0


def cmd_synth(args) -> int:
    from .synthgen import ComponentSpec, SynthSpec, gen_circle, gen_genus1, gen_three_component

    comps = ()
    if args.components:
        comps = tuple(ComponentSpec(**c) for c in json.loads(args.components))
    spec = SynthSpec(seed=args.seed, components=comps, stratified=args.stratified)
    if args.kind == "circle" and not comps:
        spec = replace(spec, components=(ComponentSpec(400, 0.02, -1.0, 1.0),))
    gen = {"three-component": gen_three_component, "genus1": gen_genus1,
           "circle": gen_circle}[args.kind]
    d = gen(spec)
    names = [f"x{j}" for j in range(d.cloud.dim)]
    write_csv(args.out, d.cloud, d.lens, names)
    print(f"wrote {d.cloud.n} points to {args.out}")
    return 0


def cmd_density(args) -> int:
    cfg = _config_from(args)
    cloud, lens = _load(cfg)
    profile = compute_density(cloud, lens, int(cfg.k))
    c = np.atleast_1d(width_multiplier(profile.smoothed, profile,
                                       WidthScaler(cfg.c_max, cfg.rate_sensitivity)))
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["index", "beta_raw", "beta", "c"])
        for i in range(cloud.n):
            w.writerow([i, repr(float(profile.raw[i])), repr(float(profile.smoothed[i])),
                        repr(float(c[i]))])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_verify(args) -> int:
    cfg = _config_from(args)
    if cfg.delta is None:
        raise InvalidParameterError("verify needs --delta")
    cloud, lens = _load(cfg)
    ref = read_csv(args.reference, cfg.lens_column)[0] if args.reference else None
    res = verify_bound(cfg, float(cfg.delta), cloud, lens, ref)
    print(f"r = {res['r']:.6g}")
    print(f"omega(delta) = {res['omega']:.6g}")
    print(f"d_bottleneck = {res['bottleneck']:.6g}")
    print(f"bound r + 2 omega = {res['bound']:.6g}")
    print(f"intersection-crossing edges = {res['intersection_crossing_edges']}")
    if "hausdorff" in res:
        print(f"4 d_H = {4 * res['hausdorff']:.6g} (<= delta: {res['sampling_ok']})")
    print("PASS" if res["pass"] else "FAIL")
    if not res["pass"]:
        raise VerificationError("bottleneck distance exceeds r + 2 omega(delta)")
    return 0


def cmd_diagram(args) -> int:
    cfg = _config_from(args)
    if args.oracle:
        if cfg.delta is None:
            raise InvalidParameterError("the Reeb oracle needs --delta")
        cloud, lens = _load(cfg)
        dg = extended_persistence(reeb_oracle(cloud, lens, float(cfg.delta)))
    else:
        graph, _ = run_pipeline(replace(cfg, outputs=[], manifest=None))
        dg = extended_persistence(graph)
    text = dg.to_jsonl()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dbmapper", description="Density-based Mapper graphs and checks.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="build a Mapper graph")
    _pipeline_args(r)
    r.add_argument("--out", action="append", help="graph export (.dot/.json/.graphml/.svg); repeatable")
    r.add_argument("--manifest", help="write the JSON run manifest here")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="standard vs density-based grid over (N, g)")
    _pipeline_args(s)
    s.add_argument("--synth", choices=["genus1", "three-component"],
                   help="generate the input instead of reading --input")
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--N-values", dest="N_values", type=_ints, default=[10, 15, 20, 25, 30])
    s.add_argument("--g-values", dest="g_values", type=_floats,
                   default=[0.2, 0.35, 0.5, 0.65, 0.8])
    s.add_argument("--expected", type=_ints, default=[2, 1], help="beta0,beta1")
    s.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default: ${WORKERS_ENV} or 1)")
    s.add_argument("--report", help="JSON report path")
    s.add_argument("--svg", help="SVG grid path")
    s.set_defaults(func=cmd_sweep)

    y = sub.add_parser("synth", help="write a synthetic dataset as CSV")
    y.add_argument("kind", choices=["three-component", "genus1", "circle"])
    y.add_argument("--seed", type=int, default=42)
    y.add_argument("--stratified", action="store_true")
    y.add_argument("--components", help='JSON list of {"count", "spread", "lens_lo", "lens_hi"}')
    y.add_argument("--out", required=True)
    y.set_defaults(func=cmd_synth)

    d = sub.add_parser("density", help="emit inverse lens density per point as CSV")
    _pipeline_args(d)
    d.add_argument("--out")
    d.set_defaults(func=cmd_density)

    v = sub.add_parser("verify", help="check the bottleneck bound r + 2 omega(delta)")
    _pipeline_args(v)
    v.add_argument("--reference", help="dense reference sample (CSV) for 4 d_H <= delta")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("diagram", help="emit an extended persistence diagram (JSON lines)")
    _pipeline_args(g)
    g.add_argument("--oracle", action="store_true", help="diagram of the Reeb oracle instead")
    g.add_argument("--out")
    g.set_defaults(func=cmd_diagram)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 2
    except (DBMapperError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
