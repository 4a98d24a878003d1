"""Lens kernels and kerneled cover sets."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .cover import Interval
from .errors import InvalidParameterError
from .geometry import LensMap

SHAPES = ("square", "gaussian")


@dataclass(frozen=True)
class KernelSpec:
    shape: str = "square"
    epsilon: float = 0.1

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise InvalidParameterError(f"kernel shape must be one of {SHAPES}, got {self.shape!r}")
        if not 0 < self.epsilon < 1:
            raise InvalidParameterError(f"threshold epsilon must lie in (0, 1), got {self.epsilon}")


@dataclass(frozen=True)
class KerneledSet:
    """Points whose kernel value for one cover interval exceeds the threshold."""

    interval_index: int
    center: float
    base_radius: float
    members: np.ndarray
    weights: np.ndarray

    @property
    def is_empty(self) -> bool:
        return self.members.size == 0

    def __len__(self):
        return int(self.members.size)

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.members.tolist(), self.weights.tolist()))


def eval_kernel(spec: KernelSpec, lens_value, t0: float, r: float, c=1.0):
    """Kernel value for lens value(s) against a kernel centred at ``t0``.

    Square: 1 inside ``|t - t0| < c r``, else 0.
    Gaussian: ``exp(2 ln(eps) / r^2 * (t - t0)^2 / (2 c^2))``, which equals
    ``eps`` exactly at ``|t - t0| = c r``; c widens the kernel.
    """
    if not r > 0:
        raise InvalidParameterError(f"kernel radius must be positive, got {r}")
    dev = np.abs(np.asarray(lens_value, dtype=float) - t0)
    c = np.asarray(c, dtype=float)
    if spec.shape == "square":
        out = (dev < c * r).astype(float)
    else:
        out = np.exp((2.0 * math.log(spec.epsilon) / r**2) * dev**2 / (2.0 * c**2))
    return float(out) if out.ndim == 0 else out


def build_kerneled_set(lens: LensMap, interval: Interval, spec: KernelSpec,
                       multipliers, interval_index: int = 0) -> KerneledSet:
    """Kerneled set of ``interval``: points with kernel value above epsilon.

    ``multipliers`` holds one width multiplier c >= 1 per point. An empty
    result is returned as-is; the caller decides whether that is fatal.
    """
    mult = np.asarray(multipliers, dtype=float)
    if mult.shape != (len(lens),):
        raise InvalidParameterError("need exactly one width multiplier per point")
    if np.any(mult < 1):
        raise InvalidParameterError("width multipliers must be >= 1")
    t0, r = interval.midpoint, interval.radius
    w = eval_kernel(spec, lens.values, t0, r, mult)
    members = np.flatnonzero(w > spec.epsilon)
    return KerneledSet(interval_index, t0, r, members, np.asarray(w)[members])


def check_sufficient_width(spec: KernelSpec, r: float,
                           samples: Iterable[tuple[float, float]], t0: float = 0.0) -> bool:
    """True iff every (lens_value, c) sample within ``r`` of ``t0`` scores above epsilon."""
    arr = np.asarray(list(samples), dtype=float).reshape(-1, 2)
    inside = np.abs(arr[:, 0] - t0) < r
    if not inside.any():
        return True
    vals = eval_kernel(spec, arr[inside, 0], t0, r, arr[inside, 1])
    return bool(np.all(np.asarray(vals) > spec.epsilon))
