"""Composite gain statistics for a two-hop cascaded fading link.

The receive amplitude is f = sum_n |h1_n| |h2_n| over the reflecting
elements, with h_i,n complex Gaussian (Rician magnitude).  This module
evaluates the mean and variance of f in closed form, exposes exact and
Gaussian-approximation samplers, and the half-order Laguerre function
the moment formulas are built from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import i0e, i1e

__all__ = [
    "ChannelConfig",
    "ChannelStats",
    "laguerre_half",
    "compute_stats",
    "sample_exact_gain",
    "sample_gauss_gain",
]


@dataclass(frozen=True)
class ChannelConfig:
    """Two-hop Rician channel parameters.

    n_elements : number of reflecting elements.
    k1, k2     : Rician factors of the two hops (linear scale, >= 0).
    sigma_h_sq : scattered power per element per hop (> 0).
    """

    n_elements: int
    k1: float = 0.0
    k2: float = 0.0
    sigma_h_sq: float = 1.0

    def __post_init__(self):
        if self.n_elements < 1:
            raise ValueError("n_elements must be a positive integer")
        if self.k1 < 0 or self.k2 < 0:
            raise ValueError("Rician factors must be nonnegative")
        if self.sigma_h_sq <= 0:
            raise ValueError("sigma_h_sq must be positive")


@dataclass(frozen=True)
class ChannelStats:
    """Moments of the composite gain f.

    alpha and beta are the element-count-scaled shape factors:
    mean = alpha * sigma_h_sq, variance = beta * sigma_h_sq**2.
    normalized_fourth_moment is E[(f / sqrt(E[f^2]))^4] under the
    Gaussian approximation of f; it lies in [1, 3].
    """

    alpha: float
    beta: float
    mean: float
    variance: float
    normalized_fourth_moment: float

    def __post_init__(self):
        if self.alpha <= 0 or self.mean <= 0:
            raise ValueError("gain mean must be positive")
        if self.beta < 0 or self.variance < 0:
            raise ValueError("gain variance must be nonnegative")
        if not 1.0 <= self.normalized_fourth_moment <= 3.0:
            raise ValueError("normalized fourth moment out of [1, 3]")

    @property
    def second_moment(self) -> float:
        """E[f^2]; the normalizer of the detector statistic."""
        return self.mean**2 + self.variance


def laguerre_half(x: float) -> float:
    """Laguerre function of order 1/2 for x <= 0.

    Evaluated through the Bessel identity
    L(x) = exp(x/2) * ((1 - x) I0(-x/2) - x I1(-x/2)),
    arranged around the exponentially scaled i0e/i1e so it stays finite
    for arbitrarily large -x.
    """
    if x > 0:
        raise ValueError("laguerre_half is only defined for x <= 0 here")
    k = -x
    return (1.0 + k) * i0e(k / 2.0) + k * i1e(k / 2.0)


def compute_stats(cfg: ChannelConfig) -> ChannelStats:
    """Closed-form moments of the composite gain for a channel config."""
    l1 = laguerre_half(-cfg.k1)
    l2 = laguerre_half(-cfg.k2)
    n = cfg.n_elements
    alpha = n * (math.pi / 4.0) * l1 * l2
    beta = n * ((1.0 + cfg.k1) * (1.0 + cfg.k2)
                - (math.pi**2 / 16.0) * l1**2 * l2**2)
    mean = alpha * cfg.sigma_h_sq
    variance = beta * cfg.sigma_h_sq**2
    second = mean**2 + variance
    m2 = mean**2 / second
    v2 = variance / second
    fourth = m2**2 + 6.0 * m2 * v2 + 3.0 * v2**2
    return ChannelStats(alpha=alpha, beta=beta, mean=mean,
                        variance=variance, normalized_fourth_moment=fourth)


def sample_exact_gain(cfg: ChannelConfig, rng: np.random.Generator,
                      size: int | None = None):
    """Draw the composite gain by sampling every element product.

    Returns a scalar when size is None, else a 1-D array of length size.
    Memory grows as size * n_elements; chunk large requests.
    """
    n = 1 if size is None else int(size)
    c = math.sqrt(cfg.sigma_h_sq / 2.0)
    nu1 = math.sqrt(cfg.k1 * cfg.sigma_h_sq)
    nu2 = math.sqrt(cfg.k2 * cfg.sigma_h_sq)
    shape = (n, cfg.n_elements)
    # in-place throughout: the temporaries here are the hot allocation
    # site of the whole simulator
    sq1 = rng.standard_normal(shape)
    sq1 *= c
    sq1 += nu1
    sq1 *= sq1
    im1 = rng.standard_normal(shape)
    im1 *= c
    im1 *= im1
    sq1 += im1
    sq2 = rng.standard_normal(shape)
    sq2 *= c
    sq2 += nu2
    sq2 *= sq2
    im2 = rng.standard_normal(shape)
    im2 *= c
    im2 *= im2
    sq2 += im2
    sq1 *= sq2
    np.sqrt(sq1, out=sq1)
    gain = sq1.sum(axis=1)
    if size is None:
        return float(gain[0])
    return gain


def sample_gauss_gain(stats: ChannelStats, rng: np.random.Generator,
                      size: int | None = None):
    """Draw the Gaussian approximation N(mean, variance) of the gain."""
    std = math.sqrt(stats.variance)
    if size is None:
        return stats.mean + std * rng.standard_normal()
    out = rng.standard_normal(int(size))
    out *= std
    out += stats.mean
    return out
