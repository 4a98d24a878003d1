"""Interval covers of the lens range: construction, validation, resolution and
the maximally coarse / fine covers induced by a kerneled cover."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateCoverError, InvalidParameterError, NonRegularCoverError
from .geometry import LensMap


@dataclass(frozen=True)
class Interval:
    """Open interval (lo, hi)."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise InvalidParameterError(f"interval needs lo < hi, got ({self.lo}, {self.hi})")

    @property
    def midpoint(self) -> float:
        return self.lo + (self.hi - self.lo) / 2

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def radius(self) -> float:
        return (self.hi - self.lo) / 2

    def contains(self, t):
        t = np.asarray(t)
        return (t > self.lo) & (t < self.hi)


@dataclass(frozen=True)
class GomicCover:
    """Intervals sorted by midpoint covering ``L = [lo, hi]``.

    Intervals are stored unclipped; ``clipped()`` gives their intersection
    with L. Endpoints of L count as interior for membership.
    """

    intervals: tuple[Interval, ...]
    overlap_g: float | None
    lo: float
    hi: float
    kind: str = "custom"

    def __post_init__(self):
        ivs = tuple(sorted(self.intervals, key=lambda iv: iv.midpoint))
        if not ivs:
            raise InvalidParameterError("a cover needs at least one interval")
        object.__setattr__(self, "intervals", ivs)

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __getitem__(self, i) -> Interval:
        return self.intervals[i]

    def clipped(self) -> list[tuple[float, float]]:
        return [(max(iv.lo, self.lo), min(iv.hi, self.hi)) for iv in self.intervals]

    @property
    def resolution(self) -> float:
        return max(b - a for a, b in self.clipped())

    def overlaps(self) -> list[tuple[float, float]]:
        """Intersections of consecutive intervals (possibly empty, then a >= b)."""
        return [(max(u.lo, v.lo), min(u.hi, v.hi))
                for u, v in zip(self.intervals, self.intervals[1:])]

    def pullback(self, lens: LensMap, i: int) -> np.ndarray:
        """Indices of points whose lens value lies in interval ``i``."""
        iv = self.intervals[i]
        t = lens.values
        lo_ok = (t > iv.lo) | ((t == iv.lo) & (iv.lo <= self.lo))
        hi_ok = (t < iv.hi) | ((t == iv.hi) & (iv.hi >= self.hi))
        return np.flatnonzero(lo_ok & hi_ok)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "overlap_g": self.overlap_g, "lo": self.lo,
                "hi": self.hi, "intervals": [[iv.lo, iv.hi] for iv in self.intervals]}


def _check_g(g, allow_zero=False):
    ok = (0 <= g < 1) if allow_zero else (0 < g < 1)
    if not ok:
        rng = "[0, 1)" if allow_zero else "(0, 1)"
        raise InvalidParameterError(f"overlap g must lie in {rng}, got {g}")


def morse_spaced_cover(lo: float, hi: float, N: int, g: float) -> GomicCover:
    """N equal-length intervals with evenly spaced midpoints over [lo, hi].

    Midpoints sit at ``lo + (i - 1/2) * delta`` with ``delta = (hi - lo) / N``
    and each interval has half-width ``delta / 2 * (1 + g / 2)``, so
    consecutive intervals overlap by ``delta * g / 2``.
    """
    if not lo < hi:
        raise InvalidParameterError(f"need lo < hi, got [{lo}, {hi}]")
    if int(N) != N or N < 1:
        raise InvalidParameterError(f"N must be a positive integer, got {N}")
    _check_g(g)
    N = int(N)
    delta = (hi - lo) / N
    half = delta / 2 * (1 + g / 2)
    mids = lo + (np.arange(1, N + 1) - 0.5) * delta
    ivs = tuple(Interval(float(m - half), float(m + half)) for m in mids)
    return GomicCover(ivs, g, float(lo), float(hi), kind="morse")


def data_spaced_breakpoints(lens: LensMap, N: int) -> np.ndarray:
    """Sorted lens values at indices ``1 + ceil(i (n - 1) / N)``, i = 0..N (1-based)."""
    t = np.sort(lens.values)
    n = t.size
    if int(N) != N or N < 1:
        raise InvalidParameterError(f"N must be a positive integer, got {N}")
    if n < N + 1:
        raise InvalidParameterError(f"data-spaced cover needs n >= N + 1 (n={n}, N={N})")
    i = np.arange(N + 1)
    # exact integer ceil(i (n - 1) / N)
    j = 1 + (-(-(i * (n - 1)) // N))
    return t[j - 1]


def data_spaced_cover(lens: LensMap, N: int, g: float) -> GomicCover:
    """Intervals holding equal numbers of lens values, widened additively.

    Base interval i is (t[j_{i-1}], t[j_i]). Each side is pushed out by
    ``g / 2`` times the shorter of the interval and its neighbour on that
    side, which keeps the cover free of triple intersections.
    """
    _check_g(g, allow_zero=True)
    bp = data_spaced_breakpoints(lens, N)
    lengths = np.diff(bp)
    if np.any(lengths <= 0):
        i = int(np.flatnonzero(lengths <= 0)[0]) + 1
        raise DegenerateCoverError(
            f"data-spaced cover is degenerate: breakpoints {i - 1} and {i} coincide "
            f"at lens value {bp[i]}; lower N or perturb the lens")
    N = int(N)
    ivs = []
    for i in range(N):
        left_ref = min(lengths[i], lengths[i - 1]) if i > 0 else lengths[i]
        right_ref = min(lengths[i], lengths[i + 1]) if i < N - 1 else lengths[i]
        ivs.append(Interval(float(bp[i] - g * left_ref / 2),
                            float(bp[i + 1] + g * right_ref / 2)))
    return GomicCover(tuple(ivs), g, lens.lo, lens.hi, kind="data")


# --------------------------------------------------------------- validation

@dataclass(frozen=True)
class Violation:
    kind: str  # coverage | triple_intersection | overlap_fraction | containment
    message: str
    where: tuple = ()


@dataclass
class GomicReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __bool__(self):
        return self.valid


def validate_gomic(cover: GomicCover | Sequence, lo: float, hi: float) -> GomicReport:
    """Check coverage of [lo, hi], triple-intersection freedom, pairwise overlap
    fractions in (0, 1) and containment freedom. Never raises."""
    if isinstance(cover, GomicCover):
        raw = [(iv.lo, iv.hi) for iv in cover.intervals]
    else:
        raw = [(iv.lo, iv.hi) if isinstance(iv, Interval) else tuple(iv) for iv in cover]
    ivs = sorted(((max(a, lo), min(b, hi)) for a, b in raw), key=lambda p: (p[0], p[1]))
    report = GomicReport()
    if not ivs:
        report.violations.append(Violation("coverage", "cover has no intervals"))
        return report

    # coverage; endpoints of L are treated as interior
    starters = [b for a, b in ivs if a <= lo]
    if not starters:
        report.violations.append(
            Violation("coverage", f"left end {lo} is not covered", (lo,)))
    else:
        reach = max(starters)
        while reach < hi:
            ext = [b for a, b in ivs if a < reach and b > reach]
            if not ext:
                nxt = min((a for a, b in ivs if a >= reach), default=hi)
                report.violations.append(Violation(
                    "coverage", f"gap in coverage at [{reach}, {nxt}]", (reach, nxt)))
                break
            reach = max(ext)

    # triple intersections by sweep; ends are processed before starts at a tie
    events = sorted([(a, 1) for a, b in ivs] + [(b, -1) for a, b in ivs],
                    key=lambda e: (e[0], e[1]))
    active = 0
    for x, kind in events:
        if kind == 1:
            active += 1
            if active >= 3:
                ends = sorted(b for a, b in ivs if a <= x < b)
                report.violations.append(Violation(
                    "triple_intersection",
                    f"{active} intervals intersect on ({x}, {ends[0]})", (x, ends[0])))
        else:
            active -= 1

    for i in range(len(ivs)):
        a1, b1 = ivs[i]
        for j in range(i + 1, len(ivs)):
            a2, b2 = ivs[j]
            if a2 >= b1:
                break
            inter = min(b1, b2) - max(a1, a2)
            if inter <= 0:
                continue
            if (a1 <= a2 and b2 <= b1) or (a2 <= a1 and b1 <= b2):
                report.violations.append(Violation(
                    "containment", f"interval ({a1}, {b1}) and ({a2}, {b2}) are nested",
                    ((a1, b1), (a2, b2))))
            for (a, b) in ((a1, b1), (a2, b2)):
                frac = inter / (b - a)
                if not 0 < frac < 1:
                    report.violations.append(Violation(
                        "overlap_fraction",
                        f"overlap fraction {frac:.4g} of ({a}, {b}) is outside (0, 1)",
                        ((a1, b1), (a2, b2))))
    return report


# ------------------------------------------------- resolution, coarse/fine

def _lens_of(s, lens: LensMap) -> np.ndarray:
    return lens.values[np.asarray(s.members, dtype=np.intp)]


def kerneled_resolution(sets, lens: LensMap) -> float:
    """Largest lens-value spread over the sets of a (kerneled) cover."""
    best = 0.0
    for s in sets:
        vals = _lens_of(s, lens)
        if vals.size == 0:
            raise DegenerateCoverError(
                f"cover set for interval {s.interval_index} is empty")
        best = max(best, float(vals.max() - vals.min()))
    return best


def _fine_interval(s, lens: LensMap) -> tuple[float, float]:
    t = lens.values
    member = np.zeros(t.size, dtype=bool)
    member[np.asarray(s.members, dtype=np.intp)] = True
    out = t[~member]
    below = out[out <= s.center]
    above = out[out >= s.center]
    a = below.max() if below.size else -np.inf
    b = above.min() if above.size else np.inf
    run = t[member & (t > a) & (t < b)]
    if run.size == 0:
        return (s.center, s.center)
    return (float(run.min()), float(run.max()))


def coarse_fine_covers(sets, lens: LensMap) -> tuple[GomicCover, GomicCover]:
    """Maximally coarse and maximally fine interval covers of a kerneled cover.

    The coarse interval of a set spans all its member lens values. The fine
    interval is the widest run of member lens values around the kernel
    centre that no non-member interrupts, i.e. the part of the set that is a
    member for every admissible width multiplier. Raises
    NonRegularCoverError when the coarse cover is not a gomic.
    """
    sets = sorted(sets, key=lambda s: s.interval_index)
    coarse_pairs, fine_pairs = [], []
    for s in sets:
        vals = _lens_of(s, lens)
        if vals.size == 0:
            raise DegenerateCoverError(f"cover set {s.interval_index} is empty")
        coarse_pairs.append((float(vals.min()), float(vals.max())))
        fine_pairs.append(_fine_interval(s, lens))
    for name, pairs in (("coarse", coarse_pairs), ("fine", fine_pairs)):
        bad = [p for p in pairs if not p[0] < p[1]]
        if bad:
            raise NonRegularCoverError(
                f"{name} cover has degenerate interval(s) {bad[:3]}")
    report = validate_gomic(coarse_pairs, lens.lo, lens.hi)
    if not report.valid:
        msgs = "; ".join(v.message for v in report.violations[:4])
        raise NonRegularCoverError(f"maximally coarse cover is not a gomic: {msgs}")
    coarse = GomicCover(tuple(Interval(a, b) for a, b in coarse_pairs), None,
                        lens.lo, lens.hi, kind="coarse")
    fine = GomicCover(tuple(Interval(a, b) for a, b in fine_pairs), None,
                      lens.lo, lens.hi, kind="fine")
    return coarse, fine
