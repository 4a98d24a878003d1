"""Deterministic synthetic datasets with components of differing lens density.

Randomness comes from numpy's PCG64. A dataset seed feeds a SeedSequence,
and each component draws from its own spawned child stream, so changing one
component's size never perturbs another component's points.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidParameterError, VerificationError
from .geometry import LensMap, PointCloud


@dataclass(frozen=True)
class ComponentSpec:
    count: int
    spread: float          # ambient noise scale sigma
    lens_lo: float = 0.0
    lens_hi: float = 10.0

    def __post_init__(self):
        if int(self.count) != self.count or self.count <= 0:
            raise InvalidParameterError(f"component count must be a positive integer, got {self.count}")
        if not self.spread > 0:
            raise InvalidParameterError(f"component spread must be > 0, got {self.spread}")
        if not self.lens_lo < self.lens_hi:
            raise InvalidParameterError("component lens range needs lens_lo < lens_hi")


THREE_COMPONENT_DEFAULT = (
    ComponentSpec(1000, 1.0), ComponentSpec(400, 1.0), ComponentSpec(150, 1.0))

GENUS1_DEFAULT = (
    ComponentSpec(1000, 0.08, 2.5, 7.5),   # dense loop
    ComponentSpec(150, 0.4, 0.0, 10.0),    # sparse elongated blob
)


@dataclass(frozen=True)
class SynthSpec:
    """Dataset recipe. ``stratified`` replaces uniform lens/angle draws by
    jittered-grid draws, which keeps sampling gaps close to their mean."""

    seed: int = 42
    components: tuple[ComponentSpec, ...] = ()
    stratified: bool = False
    max_retries: int = 5

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(
            c if isinstance(c, ComponentSpec) else ComponentSpec(**c) for c in self.components))

    def with_components(self, default) -> "SynthSpec":
        return self if self.components else replace(self, components=tuple(default))


@dataclass(frozen=True)
class SynthData:
    cloud: PointCloud
    lens: LensMap
    component: np.ndarray   # component index per point
    spec: SynthSpec = field(compare=False, default=None)

    def __iter__(self):
        # unpacks as (cloud, lens)
        yield self.cloud
        yield self.lens


def _streams(seed: int, k: int, attempt: int = 0) -> list[np.random.Generator]:
    root = np.random.SeedSequence([int(seed), int(attempt)])
    return [np.random.Generator(np.random.PCG64(s)) for s in root.spawn(k)]


def _unit(rng: np.random.Generator, n: int, stratified: bool) -> np.ndarray:
    if stratified:
        u = (np.arange(n) + rng.random(n)) / n
        return u[rng.permutation(n)]
    return rng.random(n)


def _truncated_normal_2d(rng: np.random.Generator, n: int, sigma: float,
                         cutoff: float = 4.0) -> np.ndarray:
    """Circular Gaussian samples, redrawn until every one lies within cutoff*sigma."""
    out = rng.normal(0.0, sigma, size=(n, 2))
    bad = np.hypot(out[:, 0], out[:, 1]) > cutoff * sigma
    while bad.any():
        out[bad] = rng.normal(0.0, sigma, size=(int(bad.sum()), 2))
        bad = np.hypot(out[:, 0], out[:, 1]) > cutoff * sigma
    return out


def three_component_centers(spec: SynthSpec) -> np.ndarray:
    """Centres on an equilateral triangle whose side is 12 times the largest spread."""
    comps = spec.with_components(THREE_COMPONENT_DEFAULT).components
    side = 12.0 * max(c.spread for c in comps)
    ang = np.pi / 2 + 2 * np.pi * np.arange(len(comps)) / len(comps)
    radius = side / (2 * np.sin(np.pi / len(comps))) if len(comps) > 1 else 0.0
    return radius * np.c_[np.cos(ang), np.sin(ang)]


def gen_three_component(spec: SynthSpec = SynthSpec()) -> SynthData:
    """Gaussian (x, y) blobs extruded along a uniform lens axis t.

    Points are (x, y, t) with lens t. Blob samples are truncated at four
    spreads, so with centres twelve spreads apart no point comes within
    eight spreads of another component's centre.
    """
    spec = spec.with_components(THREE_COMPONENT_DEFAULT)
    comps = spec.components
    centers = three_component_centers(spec)
    rngs = _streams(spec.seed, len(comps))
    parts, labels = [], []
    for j, (c, rng) in enumerate(zip(comps, rngs)):
        xy = centers[j] + _truncated_normal_2d(rng, c.count, c.spread)
        t = c.lens_lo + (c.lens_hi - c.lens_lo) * _unit(rng, c.count, spec.stratified)
        parts.append(np.c_[xy, t])
        labels.append(np.full(c.count, j))
    pts = np.vstack(parts)
    return SynthData(PointCloud(pts), LensMap(pts[:, 2]), np.concatenate(labels), spec)


def _loop(rng, c: ComponentSpec, x0: float, stratified: bool) -> np.ndarray:
    radius = (c.lens_hi - c.lens_lo) / 2
    mid = c.lens_lo + radius
    # noise is radial, so the loop never leaves [lens_lo, lens_hi] by more than the noise
    theta = 2 * np.pi * _unit(rng, c.count, stratified)
    rr = radius + c.spread * rng.standard_normal(c.count)
    rr = np.clip(rr, radius - 4 * c.spread, radius + 4 * c.spread)
    return np.c_[x0 + rr * np.cos(theta), mid + rr * np.sin(theta)]


def _segment(rng, c: ComponentSpec, x0: float, stratified: bool) -> np.ndarray:
    t = c.lens_lo + (c.lens_hi - c.lens_lo) * _unit(rng, c.count, stratified)
    x = x0 + np.clip(c.spread * rng.standard_normal(c.count), -4 * c.spread, 4 * c.spread)
    return np.c_[x, t]


def gen_circle(spec: SynthSpec) -> SynthData:
    """Single noisy circle in the plane; lens = height. Uses the first component."""
    if not spec.components:
        raise InvalidParameterError("gen_circle needs one component spec")
    c = spec.components[0]
    rng = _streams(spec.seed, 1)[0]
    pts = _loop(rng, c, 0.0, spec.stratified)
    return SynthData(PointCloud(pts), LensMap(pts[:, 1]), np.zeros(c.count, dtype=int), spec)


def gen_genus1(spec: SynthSpec = SynthSpec(), verify_delta: float | None = None) -> SynthData:
    """Dense noisy loop plus a sparse elongated blob, in the plane; lens = height.

    Component 0 is a circle whose vertical diameter spans its lens range;
    component 1 is a vertical strip over its lens range, placed six units to
    the right of the loop. With ``verify_delta`` the Reeb graph of the Rips
    complex at that scale must have two components and one cycle; failed
    draws are retried on fresh streams up to ``max_retries`` times.
    """
    spec = spec.with_components(GENUS1_DEFAULT)
    if len(spec.components) != 2:
        raise InvalidParameterError("genus-1 data needs exactly two components (loop, blob)")
    loop_c, blob_c = spec.components
    loop_r = (loop_c.lens_hi - loop_c.lens_lo) / 2
    attempts = spec.max_retries + 1 if verify_delta is not None else 1
    for attempt in range(attempts):
        r_loop, r_blob = _streams(spec.seed, 2, attempt)
        a = _loop(r_loop, loop_c, 0.0, spec.stratified)
        b = _segment(r_blob, blob_c, loop_r + 6.0, spec.stratified)
        pts = np.vstack([a, b])
        data = SynthData(PointCloud(pts), LensMap(pts[:, 1]),
                         np.r_[np.zeros(loop_c.count, int), np.ones(blob_c.count, int)], spec)
        if verify_delta is None:
            return data
        from .persistence import reeb_oracle

        if reeb_oracle(data.cloud, data.lens, verify_delta).betti() == (2, 1):
            return data
    raise VerificationError(
        f"genus-1 generator: no draw in {attempts} attempts has beta0=2, beta1=1 "
        f"at delta={verify_delta}")
