"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import time
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dbmapper.cli import RunConfig, sweep_grid
from dbmapper.cluster import Clusterer
from dbmapper.cover import data_spaced_cover, kerneled_resolution, morse_spaced_cover
from dbmapper.density import WidthScaler, multipliers_for
from dbmapper.geometry import LensMap, PointCloud, hausdorff_estimate, modulus_of_continuity
from dbmapper.kernel import KernelSpec, build_kerneled_set, check_sufficient_width, eval_kernel
from dbmapper.mapper import build_mapper, find_intersection_crossing_edges, graph_betti
from dbmapper.persistence import (bottleneck, bottleneck_points, diagram_gap,
                                  extended_persistence, reeb_oracle)
from dbmapper.synthgen import (ComponentSpec, SynthSpec, gen_circle, gen_genus1,
                               gen_three_component)

from oracles import brute_bottleneck, plain_mapper


# ------------------------------------------------------------------ 1

def random_dataset(seed, n=500):
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0, 1, (4, 2))
    X = centers[rng.integers(0, 4, n)] + rng.normal(0, 0.08, (n, 2))
    t = X[:, 0] + 0.5 * X[:, 1] + rng.normal(0, 0.05, n)
    return X, t


def test_criterion_1_standard_reduction(acceptance_log):
    t0 = time.perf_counter()
    mismatches = []
    for seed in range(1, 6):
        X, t = random_dataset(seed)
        cloud, lens = PointCloud(X), LensMap(t)
        cover = morse_spaced_cover(lens.lo, lens.hi, 10, 0.5)
        delta = 0.06
        g = build_mapper(cloud, lens, cover, KernelSpec("square", 0.1), WidthScaler(3.0, 0.0),
                         Clusterer("single-linkage", {"delta": delta}))
        want = plain_mapper(X, t.tolist(), [(iv.lo, iv.hi) for iv in cover], delta)
        if g.canonical() != (*want, False):
            mismatches.append(seed)
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 5.0
    acceptance_log(1, ok, f"5 datasets identical to plain Mapper oracle "
                          f"(mismatched seeds {mismatches}), {elapsed:.2f}s < 5s")
    assert ok


# ------------------------------------------------------------------ 2

def fixed_datasets():
    yield "three-component", gen_three_component(SynthSpec(seed=42))
    yield "genus1", gen_genus1(SynthSpec(seed=42))
    yield "circle", gen_circle(SynthSpec(seed=0, components=(ComponentSpec(400, 0.02, -1, 1),)))
    X, t = random_dataset(1)
    yield "blobs", (PointCloud(X), LensMap(t))


def uncovered(cloud, lens, cover, shape, c_max, eps, s=1.0):
    mult, _ = multipliers_for(cloud, lens, 15, WidthScaler(c_max, s))
    seen = np.zeros(cloud.n, dtype=bool)
    for i, iv in enumerate(cover):
        seen[build_kerneled_set(lens, iv, KernelSpec(shape, eps), mult, i).members] = True
    return int(np.sum(~seen))


GRID = [(shape, c_max, eps) for shape in ("square", "gaussian")
        for c_max in (1.0, 2.0, 4.0) for eps in (0.05, 0.1, 0.3)]

_violations_2 = []


@settings(max_examples=30)
@given(st.integers(0, 2**31 - 1), st.integers(1, 15), st.floats(0.05, 0.9),
       st.sampled_from(["morse", "data"]))
def test_criterion_2_coverage_property(seed, N, g, kind):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(120, 2)) * rng.uniform(0.2, 2, 2)
    t = X[:, 0] ** 2 + rng.normal(0, 0.3, 120)
    cloud, lens = PointCloud(X), LensMap(t)
    cover = (morse_spaced_cover(lens.lo, lens.hi, N, g) if kind == "morse"
             else data_spaced_cover(lens, N, g))
    for shape, c_max, eps in GRID:
        miss = uncovered(cloud, lens, cover, shape, c_max, eps)
        if miss:
            _violations_2.append((seed, shape, c_max, eps, miss))
        assert miss == 0


def test_criterion_2_coverage(acceptance_log):
    violations = list(_violations_2)
    checked = 0
    for name, (cloud, lens) in fixed_datasets():
        for N, g in ((5, 0.3), (10, 0.5), (20, 0.8)):
            for cover in (morse_spaced_cover(lens.lo, lens.hi, N, g),
                          data_spaced_cover(lens, N, g)):
                for shape, c_max, eps in GRID:
                    checked += 1
                    miss = uncovered(cloud, lens, cover, shape, c_max, eps)
                    if miss:
                        violations.append((name, N, g, shape, c_max, eps, miss))
    ok = not violations
    acceptance_log(2, ok, f"union of kerneled sets covers every point in {checked} fixed "
                          f"configurations plus the property sweep; violations {len(violations)}")
    assert ok, violations[:5]


# ------------------------------------------------------------------ 3

def test_criterion_3_gaussian_sufficient_width(acceptance_log):
    spec = KernelSpec("gaussian", 0.1)
    r = 1.7
    dev = np.linspace(0, r, 100, endpoint=False)
    cs = np.linspace(1, 4, 100)
    D, C = np.meshgrid(dev, cs)
    vals = eval_kernel(spec, 2.0 + D.ravel(), 2.0, r, C.ravel())
    grid_ok = bool(np.all(vals > spec.epsilon)) and vals.size == 10_000
    via_check = check_sufficient_width(spec, r, zip(2.0 + D.ravel(), C.ravel()), t0=2.0)
    boundary = eval_kernel(spec, 2.0 + r, 2.0, r, 1.0)
    bnd_ok = abs(boundary - spec.epsilon) <= 1e-12
    ok = grid_ok and via_check and bnd_ok
    acceptance_log(3, ok, f"10^4-sample grid min K = {vals.min():.6f} > eps=0.1; "
                          f"|K(r, c=1) - eps| = {abs(boundary - spec.epsilon):.2e} <= 1e-12")
    assert ok


# -------------------------------------------------------------- 4 and 5

def bound_datasets():
    small = SynthSpec(seed=7, stratified=True, components=(ComponentSpec(400, 0.005, -5, 5),))
    dense = SynthSpec(seed=8, stratified=True, components=(ComponentSpec(4000, 0.005, -5, 5),))
    yield "circle", gen_circle(small), gen_circle(dense), [(4, 0.5), (5, 0.8), (6, 0.5),
                                                           (8, 0.5), (8, 0.8)]
    small = SynthSpec(seed=7, stratified=True, components=(
        ComponentSpec(1000, 0.005, 2.5, 7.5), ComponentSpec(300, 0.005, 0, 10)))
    dense = SynthSpec(seed=8, stratified=True, components=(
        ComponentSpec(10_000, 0.005, 2.5, 7.5), ComponentSpec(3000, 0.005, 0, 10)))
    yield "genus1", gen_genus1(small), gen_genus1(dense), [(5, 0.5), (6, 0.5), (8, 0.5),
                                                           (8, 0.8), (10, 0.5)]


@pytest.fixture(scope="module")
def bound_runs():
    """Density-based Mapper vs the Reeb oracle on 10 settings."""
    t0 = time.perf_counter()
    rows = []
    for name, d, ref, settings_ in bound_datasets():
        d_h = hausdorff_estimate(d.cloud, ref.cloud)
        delta = 1.05 * 4 * d_h
        omega = modulus_of_continuity(d.cloud, d.lens, delta)
        oracle = reeb_oracle(d.cloud, d.lens, delta)
        d_oracle = extended_persistence(oracle)
        clusterer = Clusterer("single-linkage", {"delta": delta})
        for N, g in settings_:
            cover = morse_spaced_cover(d.lens.lo, d.lens.hi, N, g)
            crossing = find_intersection_crossing_edges(d.cloud, d.lens, delta, cover)
            graph = build_mapper(d.cloud, d.lens, cover, KernelSpec("square", 0.1),
                                 WidthScaler(3.0, 1.0), clusterer)
            r = kerneled_resolution(graph.info["kerneled_sets"], d.lens)
            d_mapper = extended_persistence(graph)
            rows.append(dict(
                name=name, N=N, g=g, delta=delta, d_h=d_h, omega=omega, r=r,
                crossing=len(crossing), oracle_betti=oracle.betti(),
                bottleneck=bottleneck(d_oracle, d_mapper),
                gap=diagram_gap(d_oracle, d_mapper),
                gap_at_r=diagram_gap(d_oracle, d_mapper, tol=r)))
    return rows, time.perf_counter() - t0


def test_criterion_4_convergence_bound(bound_runs, acceptance_log):
    rows, elapsed = bound_runs
    bad = []
    for row in rows:
        hyp = row["crossing"] == 0 and 4 * row["d_h"] <= row["delta"]
        holds = row["bottleneck"] <= row["r"] + 2 * row["omega"] + 1e-9
        print(f"  {row['name']} N={row['N']} g={row['g']}: d_B={row['bottleneck']:.4f} "
              f"<= r + 2w = {row['r']:.4f} + 2*{row['omega']:.4f}; hypotheses {hyp}")
        if not (hyp and holds):
            bad.append((row["name"], row["N"], row["g"]))
    expected_topology = {"circle": (1, 1), "genus1": (2, 1)}
    topo_ok = all(row["oracle_betti"] == expected_topology[row["name"]] for row in rows)
    ok = not bad and topo_ok and len(rows) == 10 and elapsed < 60
    acceptance_log(4, ok, f"bottleneck <= r + 2 omega(delta) on {len(rows) - len(bad)}/10 "
                          f"settings with hypotheses verified, {elapsed:.1f}s < 60s")
    assert ok, bad


def test_criterion_5_diagram_inclusion(bound_runs, acceptance_log):
    rows, _ = bound_runs
    bad = []
    for row in rows:
        print(f"  {row['name']} N={row['N']} g={row['g']}: gap={row['gap']:.4f} "
              f"vs r={row['r']:.4f} (gap with coordinate tolerance r: {row['gap_at_r']:.4f})")
        if not row["gap"] <= row["r"]:
            bad.append((row["name"], row["N"], row["g"], round(row["gap"], 4)))
    ok = not bad
    acceptance_log(5, ok, f"diagram_gap(oracle, Mapper) <= r with exact matching (tol 1e-9): "
                          f"{10 - len(bad)}/10 settings; violations {bad[:3]}")
    assert ok


# ------------------------------------------------------------------ 6

def test_criterion_6_grid_experiment(acceptance_log):
    t0 = time.perf_counter()
    d = gen_genus1(SynthSpec(seed=42))
    cfg = RunConfig(clusterer="dbscan", dbscan_eps=0.6, dbscan_min_weight=3.0, kernel="square",
                    c_max=3.0, k=15, rate_sensitivity=1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rep = sweep_grid(cfg, [10, 15, 20, 25, 30], [0.2, 0.35, 0.5, 0.65, 0.8], (2, 1),
                         d.cloud, d.lens)
    elapsed = time.perf_counter() - t0
    dens, std = rep.correct_count("density"), rep.correct_count("standard")
    for mode in ("standard", "density"):
        print(f"{mode} (rows N, columns g, * = correct):")
        print(rep.table(mode))
    ok = dens >= std and dens >= 8 and elapsed < 120
    acceptance_log(6, ok, f"density-based {dens}/25 vs standard {std}/25 correct "
                          f"(reference figures 10/25 vs 3/25), {elapsed:.1f}s < 120s")
    assert ok


# ------------------------------------------------------------------ 7

def test_criterion_7_kerneled_pullback(acceptance_log):
    d = gen_three_component(SynthSpec(seed=42))
    mult, profile = multipliers_for(d.cloud, d.lens, 15, WidthScaler(3.0, 1.0))
    from dbmapper.cover import Interval

    iv = Interval(3.65, 3.87)
    ks = build_kerneled_set(d.lens, iv, KernelSpec("gaussian", 0.1), mult)
    pull = np.flatnonzero(iv.contains(d.lens.values))
    strict = set(pull.tolist()) < set(ks.members.tolist())
    extra = np.setdiff1d(ks.members, pull)
    mean_beta = [float(profile.smoothed[d.component == j].mean()) for j in range(3)]
    per_comp = np.bincount(d.component[extra], minlength=3)
    allowed = [j for j in range(3) if mean_beta[j] > mean_beta[0]]
    bad = int(sum(per_comp[j] for j in range(3) if j not in allowed))
    print(f"  mean beta per component {np.round(mean_beta, 4).tolist()}; "
          f"extras per component {per_comp.tolist()}")
    ok = strict and bad == 0
    acceptance_log(7, ok, f"kerneled set strictly contains pullback: {strict}; "
                          f"extras in the dense component: {bad} (must be 0)")
    assert ok


# ------------------------------------------------------------------ 8

def test_criterion_8_persistence_engine(acceptance_log):
    rng = np.random.default_rng(2024)
    count_fail = 0
    for _ in range(50):
        n = int(rng.integers(1, 21))
        m = int(rng.integers(0, 2 * n + 1))
        edges = [tuple(rng.choice(n, 2, replace=False)) for _ in range(m)] if n > 1 else []
        f = rng.normal(size=n) if rng.random() < 0.5 else rng.integers(0, 3, n).astype(float)
        dg = extended_persistence((n, edges), f)
        b0, b1 = graph_betti(n, edges)
        c = dg.counts()
        count_fail += (c["Ext0"] != b0) or (c["Ext1"] != b1)
    bn_fail = 0
    for _ in range(50):
        k1, k2 = rng.integers(0, 7, 2)
        A = rng.uniform(0, 5, (k1, 2))
        B = rng.uniform(0, 5, (k2, 2))
        bn_fail += bottleneck_points(A, B) != brute_bottleneck(A, B)
    ok = count_fail == 0 and bn_fail == 0
    acceptance_log(8, ok, f"50 random graphs: {50 - count_fail}/50 with #Ext0 = components and "
                          f"#Ext1 = cycle rank; 50 bottleneck checks exact vs brute force: "
                          f"{50 - bn_fail}/50")
    assert ok
