"""Energy-detector decision regions and decoding.

The receiver squares the observation and divides by E[f^2] so the
conditional mean of the statistic is E_m + noise_var for level m.
Regions are contiguous intervals around those centers; a point on a
cut belongs to the region on its left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelStats
from .ratefn import RateModel, rate_left, rate_right

__all__ = [
    "DecisionRegions",
    "normalized_statistic",
    "regions_from_design",
    "midpoint_regions",
    "decode_one_sided",
    "decode_two_sided",
    "ser_upper_bound",
]


@dataclass(frozen=True)
class DecisionRegions:
    """Contiguous decoding intervals on the statistic axis.

    boundaries : the L-1 interior cut points, strictly increasing.
    centers    : conditional statistic means, one per level.
    deviations : (left, right) distances from each center to its region
                 edges.  The first left and last right entries describe
                 the unbounded outer edges; the stored first left value
                 is 0 by convention and the last right value is inf.
    """

    boundaries: tuple
    centers: tuple
    deviations: tuple

    def __post_init__(self):
        object.__setattr__(self, "boundaries", tuple(float(b) for b in self.boundaries))
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
        object.__setattr__(self, "deviations",
                           tuple((float(l), float(r)) for l, r in self.deviations))
        n = len(self.centers)
        if n < 1:
            raise ValueError("need at least one level")
        if len(self.boundaries) != n - 1 or len(self.deviations) != n:
            raise ValueError("boundary/deviation counts do not match levels")
        for a, b in zip(self.boundaries, self.boundaries[1:]):
            if not b > a:
                raise ValueError("boundaries must be strictly increasing")
        for dl, dr in self.deviations:
            if dl < 0 or dr < 0:
                raise ValueError("deviations must be nonnegative")
        for i, c in enumerate(self.centers):
            lo = self.boundaries[i - 1] if i > 0 else -math.inf
            hi = self.boundaries[i] if i < n - 1 else math.inf
            if not lo <= c <= hi:
                raise ValueError("center falls outside its region")

    @property
    def level_count(self) -> int:
        return len(self.centers)


def normalized_statistic(y_r, stats: ChannelStats):
    """Square the observation and normalize by the gain second moment."""
    stat = np.square(y_r) / stats.second_moment
    if np.isscalar(y_r):
        return float(stat)
    return stat


def regions_from_design(energies, deviations, noise_var: float) -> DecisionRegions:
    """Build regions around centers E_m + noise_var from deviation pairs.

    Adjacent regions must meet: center_m + right_m == center_{m+1} -
    left_{m+1} up to round-off, otherwise the design is inconsistent
    and a ValueError is raised.
    """
    energies = [float(e) for e in energies]
    deviations = [(float(l), float(r)) for l, r in deviations]
    if len(energies) != len(deviations):
        raise ValueError("one deviation pair per energy level required")
    for a, b in zip(energies, energies[1:]):
        if not b > a:
            raise ValueError("energies must be strictly increasing")
    if noise_var < 0:
        raise ValueError("noise_var must be nonnegative")
    centers = [e + noise_var for e in energies]
    boundaries = []
    for i in range(len(centers) - 1):
        right_edge = centers[i] + deviations[i][1]
        left_edge = centers[i + 1] - deviations[i + 1][0]
        if math.isinf(right_edge) or math.isinf(left_edge):
            raise ValueError("interior region edges must be finite")
        tol = 1e-8 * max(1.0, abs(right_edge), abs(left_edge))
        if abs(right_edge - left_edge) > tol:
            raise ValueError(
                f"regions {i} and {i + 1} do not meet: right edge "
                f"{right_edge!r} vs left edge {left_edge!r}")
        boundaries.append(0.5 * (right_edge + left_edge))
    return DecisionRegions(boundaries=tuple(boundaries),
                           centers=tuple(centers),
                           deviations=tuple(deviations))


def midpoint_regions(cb, noise_var: float) -> DecisionRegions:
    """Cut halfway between adjacent centers; the baseline receiver."""
    energies = cb.energies
    n = len(energies)
    deviations = []
    for i in range(n):
        dl = 0.0 if i == 0 else 0.5 * (energies[i] - energies[i - 1])
        dr = math.inf if i == n - 1 else 0.5 * (energies[i + 1] - energies[i])
        deviations.append((dl, dr))
    return regions_from_design(energies, deviations, noise_var)


def decode_one_sided(stat, regions: DecisionRegions):
    """Map statistics to level indices (0-based).

    A statistic equal to a cut decodes to the region left of it.
    Accepts scalars or arrays.
    """
    bounds = np.asarray(regions.boundaries)
    idx = np.searchsorted(bounds, stat, side="left")
    if np.isscalar(stat):
        return int(idx)
    return idx


def decode_two_sided(y_r, regions: DecisionRegions, stats: ChannelStats):
    """Decode sign and level jointly to a symbol index (0-based).

    Levels come from the normalized statistic; the sign of y_r picks
    the constellation half (zero counts as positive).  Symbol order
    matches SymbolSet: most negative amplitude first.
    """
    stat = np.square(y_r) / stats.second_moment
    bounds = np.asarray(regions.boundaries)
    level = np.searchsorted(bounds, stat, side="left")
    n = regions.level_count
    sym = np.where(np.asarray(y_r) < 0, n - 1 - level, n + level)
    if np.isscalar(y_r):
        return int(sym)
    return sym


def ser_upper_bound(regions: DecisionRegions, model: RateModel, side: str) -> float:
    """Chernoff-style symbol-error bound for a region layout.

    Sums exp(-rate) over every finite region edge, evaluated at the
    actual level energies and deviations.  The unbounded outer edges
    contribute nothing; the first level's stored left deviation stands
    for an edge at -inf (both sidednesses) and is skipped.  The result
    is clipped to 1.
    """
    if side not in ("one", "two"):
        raise ValueError(f"side must be 'one' or 'two', got {side!r}")
    n = regions.level_count
    total = 0.0
    for i in range(n):
        energy = regions.centers[i] - model.noise_var
        dl, dr = regions.deviations[i]
        if i > 0 and not math.isinf(dl):
            total += math.exp(-rate_left(model, energy, dl))
        if not math.isinf(dr):
            total += math.exp(-rate_right(model, energy, dr))
    return min(1.0, total / n)
