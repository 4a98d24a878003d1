"""Inverse lens-space density and the kernel width multiplier derived from it."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import expit

from .errors import InvalidParameterError
from .geometry import LensMap, NeighborGraph, PointCloud, knn


@dataclass(frozen=True)
class DensityProfile:
    raw: np.ndarray
    smoothed: np.ndarray
    mean_mu: float
    std_sigma: float

    @classmethod
    def from_values(cls, raw, smoothed) -> "DensityProfile":
        raw = np.asarray(raw, dtype=float)
        smoothed = np.asarray(smoothed, dtype=float)
        if raw.shape != smoothed.shape:
            raise InvalidParameterError("raw and smoothed densities differ in length")
        if np.any(smoothed < 0) or not np.all(np.isfinite(smoothed)):
            raise InvalidParameterError("inverse densities must be finite and >= 0")
        return cls(raw, smoothed, float(smoothed.mean()), float(smoothed.std()))


@dataclass(frozen=True)
class WidthScaler:
    c_max: float = 3.0
    sensitivity: float = 1.0

    def __post_init__(self):
        if not self.c_max >= 1:
            raise InvalidParameterError(f"c_max must be >= 1, got {self.c_max}")
        if not self.sensitivity >= 0:
            raise InvalidParameterError(
                f"rate sensitivity must be >= 0, got {self.sensitivity}")


def raw_inverse_density(lens: LensMap, nbrs: NeighborGraph) -> np.ndarray:
    """Spread (max - min) of lens values over each point's k neighbours."""
    if len(nbrs) != len(lens):
        raise InvalidParameterError("neighbour graph and lens differ in length")
    vals = lens.values[nbrs.neighbors]
    return vals.max(axis=1) - vals.min(axis=1)


def _raised_cosine(u):
    return np.where(u < 1.0, 0.5 * (1.0 + np.cos(np.pi * np.minimum(u, 1.0))), 0.0)


def smooth_density(raw, cloud: PointCloud) -> np.ndarray:
    """Normalised convolution of ``raw`` with a separable raised-cosine window.

    The window half-support along each axis is a tenth of the cloud's extent
    on that axis. Axes with zero extent contribute a factor of 1.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.shape != (cloud.n,):
        raise InvalidParameterError("raw density length does not match the cloud")
    pts = cloud.points
    width = (pts.max(axis=0) - pts.min(axis=0)) / 10.0
    live = width > 0
    if not np.any(live):
        return np.full_like(raw, raw.mean())
    scaled = pts[:, live] / width[live]

    pairs = cKDTree(scaled).query_pairs(r=1.0, p=np.inf, output_type="ndarray")
    num = raw.copy()
    den = np.ones_like(raw)
    if pairs.size:
        i, j = pairs[:, 0], pairs[:, 1]
        w = np.prod(_raised_cosine(np.abs(scaled[i] - scaled[j])), axis=1)
        np.add.at(num, i, w * raw[j])
        np.add.at(num, j, w * raw[i])
        np.add.at(den, i, w)
        np.add.at(den, j, w)
    out = num / den
    # a convex combination cannot leave [min, max]; clip rounding noise
    return np.clip(out, raw.min(), raw.max())


def compute_density(cloud: PointCloud, lens: LensMap, k: int) -> DensityProfile:
    lens.check_matches(cloud)
    raw = raw_inverse_density(lens, knn(cloud, k))
    return DensityProfile.from_values(raw, smooth_density(raw, cloud))


def width_multiplier(beta, profile: DensityProfile, scaler: WidthScaler):
    """Kernel width multiplier c(beta) in [1, c_max ** sensitivity].

    ``1 + (c_max - 1) * sigmoid((beta - mu) / sigma)`` raised to the rate
    sensitivity, so a sensitivity of 0 gives 1 everywhere. Accepts scalars
    or arrays.
    """
    beta = np.asarray(beta, dtype=float)
    if scaler.sensitivity == 0 or profile.std_sigma == 0 or scaler.c_max == 1:
        out = np.ones_like(beta)
    else:
        z = (beta - profile.mean_mu) / profile.std_sigma
        base = 1.0 + (scaler.c_max - 1.0) * expit(z)
        out = base ** scaler.sensitivity
    return float(out) if out.ndim == 0 else out


def multipliers_for(cloud: PointCloud, lens: LensMap, k: int,
                    scaler: WidthScaler) -> tuple[np.ndarray, DensityProfile | None]:
    """Per-point width multipliers; density is skipped entirely when sensitivity is 0."""
    if scaler.sensitivity == 0:
        return np.ones(cloud.n), None
    profile = compute_density(cloud, lens, k)
    return np.asarray(width_multiplier(profile.smoothed, profile, scaler)), profile
