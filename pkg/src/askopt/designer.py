"""Max-min exponent constellation design under an average-energy budget.

For a target exponent t the greedy pass places levels left to right in
budget-normalized units: each interior region edge is pushed exactly
far enough that its deviation rate equals t.  An outer bisection then
finds the largest t whose design still fits the unit average-energy
budget, and the result is scaled up by the energy cap.  Larger t means
wider regions, so the scaled average energy grows monotonically with t
and the bisection is well posed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .constellation import Codebook, energy_cap
from .detector import DecisionRegions, regions_from_design
from .ratefn import (
    ConvergenceError,
    RateEvaluator,
    RateModel,
    VarianceCoefficients,
    statistic_variance,
    variance_coefficients,
)

__all__ = [
    "InfeasibleExponent",
    "Design",
    "design_for_exponent",
    "optimize",
    "achieved_exponent",
    "min_boundary_rate",
]

# Designs whose top level runs past this budget-normalized energy are
# declared infeasible rather than chased further.
_ENERGY_LIMIT = 1e3

_BRENTQ_KW = dict(xtol=1e-15, rtol=1e-12, maxiter=200)


class InfeasibleExponent(Exception):
    """No design reaches the requested exponent within the search range."""


@dataclass(frozen=True)
class Design:
    """A finished constellation design.

    scaled holds the audit trail in budget units: one (energy, left,
    right) deviation triple per level, with the outer-edge conventions
    (first left stored as 0, last right inf).  codebook and regions are
    the cap-scaled artifacts the transmitter and receiver use.
    """

    codebook: Codebook
    regions: DecisionRegions
    exponent: float
    case: str
    scaled: tuple
    cap: float
    model: RateModel
    coefficients: VarianceCoefficients | None
    iterations: int


def _levels(side: str, m: int) -> int:
    return m if side == "one" else m // 2


def _solve_right_deviation(rates: RateEvaluator, t: float, energy: float,
                           hint: float) -> float:
    """Deviation with right rate exactly t; the rate is increasing in d."""

    def f(d):
        return rates.right(energy, d) - t

    b = hint if hint > 0 else 1e-8
    if f(b) > 0:
        a = b / 4.0
        while f(a) > 0:
            b = a
            a /= 4.0
            if a < 1e-300:
                raise ConvergenceError("right deviation underflow")
    else:
        a = b
        b *= 4.0
        while f(b) <= 0:
            a = b
            b *= 4.0
            if b > 1e12:
                raise ConvergenceError("right deviation bracket not found")
    return brentq(f, a, b, **_BRENTQ_KW)


def _solve_next_energy(rates: RateEvaluator, t: float, floor: float,
                       hint: float) -> float:
    """Smallest energy above floor whose left rate at the gap equals t.

    The gap rate vanishes as the energy approaches the floor and the
    expanding bracket walks outward until the first sign change, so the
    smallest root is the one found.  The left rate saturates in energy,
    so for large t there may be no crossing at all.
    """

    def f(energy):
        return rates.left(energy, energy - floor) - t

    step = max(1e-10, hint / 8.0, 1e-12 * max(1.0, floor))
    a = floor
    b = floor + step
    while b <= _ENERGY_LIMIT:
        if f(b) > 0:
            return brentq(f, a, b, **_BRENTQ_KW)
        a = b
        step *= 1.6
        b = floor + step
    raise InfeasibleExponent(
        f"no level above {floor!r} reaches left rate {t!r}")


def _solve_spacing(coeffs: VarianceCoefficients, t: float, prev: float) -> float:
    """Next level under the quadratic rule: the gap splits into deviation
    radii sqrt(2 t Var(u)) measured at the two adjacent levels."""
    sq2t = math.sqrt(2.0 * t)
    radius_prev = sq2t * math.sqrt(statistic_variance(coeffs, prev))

    def f(energy):
        radius = sq2t * math.sqrt(statistic_variance(coeffs, energy))
        return (energy - prev) - (radius + radius_prev)

    step = max(1e-10, radius_prev)
    a = prev
    b = prev + step
    while b <= _ENERGY_LIMIT:
        if f(b) > 0:
            return brentq(f, a, b, **_BRENTQ_KW)
        a = b
        step *= 1.6
        b = prev + step
    raise InfeasibleExponent(
        f"no spacing above {prev!r} supports exponent {t!r}")


def _design_exact(t: float, side: str, levels: int,
                  rates: RateEvaluator) -> list:
    # The variance polynomial only seeds bracket scales here.
    coeffs = variance_coefficients(rates.model)
    scaled = []
    prev_energy = 0.0
    prev_dr = 0.0
    for idx in range(levels):
        if side == "one" and idx == 0:
            energy, dl = 0.0, 0.0
        else:
            floor = prev_energy + prev_dr
            hint = math.sqrt(2.0 * t * statistic_variance(coeffs, floor))
            energy = _solve_next_energy(rates, t, floor, hint)
            dl = energy - floor
        if idx == levels - 1:
            dr = math.inf
        else:
            hint = math.sqrt(2.0 * t * statistic_variance(coeffs, energy))
            dr = _solve_right_deviation(rates, t, energy, hint)
        scaled.append([energy, dl, dr])
        prev_energy, prev_dr = energy, dr
    return scaled


def _design_quadratic(t: float, side: str, levels: int,
                      rates: RateEvaluator) -> list:
    coeffs = rates.coeffs
    sq2t = math.sqrt(2.0 * t)
    scaled = []
    prev_energy = 0.0
    prev_dr = sq2t * math.sqrt(statistic_variance(coeffs, 0.0))
    for idx in range(levels):
        if side == "one" and idx == 0:
            energy, dl = 0.0, 0.0
        else:
            energy = _solve_spacing(coeffs, t, prev_energy)
            dl = energy - prev_energy - prev_dr
        if idx == levels - 1:
            dr = math.inf
        else:
            dr = sq2t * math.sqrt(statistic_variance(coeffs, energy))
        scaled.append([energy, dl, dr])
        prev_energy = energy
        if idx < levels - 1:
            prev_dr = dr
    return scaled


def design_for_exponent(t: float, side: str, m: int,
                        rates: RateEvaluator) -> tuple:
    """Greedy one-pass design at a fixed target exponent t.

    Returns budget-unit (energy, left, right) triples, one per level.
    Raises InfeasibleExponent when no layout reaches t within the
    search range.
    """
    if t <= 0 or not math.isfinite(t):
        raise ValueError("target exponent must be positive and finite")
    energy_cap(side, m)  # side/size validation
    levels = _levels(side, m)
    if rates.case == "exact":
        scaled = _design_exact(t, side, levels, rates)
    else:
        scaled = _design_quadratic(t, side, levels, rates)
    if side == "two":
        # The innermost level's region is open to the left at decode
        # time; its solve anchored the energy, not a real boundary.
        scaled[0][1] = 0.0
    return tuple(tuple(row) for row in scaled)


def optimize(side: str, m: int, model: RateModel, case: str = "exact", *,
             eps_exponent: float = 1e-8, eps_budget: float = 1e-6,
             normalized_fourth_moment: float | None = None,
             paper_convention: bool = False,
             max_iterations: int = 200) -> Design:
    """Best equalized design meeting the average-energy budget.

    Bisects the target exponent until the scaled average energy sits
    within eps_budget below 1, then scales the result up by the cap.
    """
    cap = energy_cap(side, m)
    levels = _levels(side, m)
    if case == "exact":
        rates = RateEvaluator(model)
    else:
        coeffs = variance_coefficients(model, normalized_fourth_moment,
                                       paper_convention=paper_convention)
        rates = RateEvaluator(model, case, coeffs)

    def attempt(t):
        try:
            scaled = design_for_exponent(t, side, m, rates)
        except InfeasibleExponent:
            return None, None
        return scaled, sum(row[0] for row in scaled) / levels

    t_high = 1.0
    for _ in range(80):
        scaled, avg = attempt(t_high)
        if scaled is None or avg >= 1.0:
            break
        t_high *= 2.0
    else:
        raise ConvergenceError("no over-budget exponent found while doubling")

    t_low = 0.0
    best = None
    iterations = 0
    while True:
        iterations += 1
        t_mid = 0.5 * (t_low + t_high)
        scaled, avg = attempt(t_mid)
        if scaled is not None and avg < 1.0:
            t_low = t_mid
            best = (t_mid, scaled, avg)
        else:
            t_high = t_mid
        if (best is not None and (t_high - t_low) < eps_exponent
                and abs(best[2] - 1.0) < eps_budget):
            break
        if iterations >= max_iterations:
            raise ConvergenceError("budget bisection did not converge")

    exponent, scaled, _ = best
    energies = tuple(cap * row[0] for row in scaled)
    deviations = tuple((cap * row[1], cap * row[2]) for row in scaled)
    codebook = Codebook(side=side, m=m, energies=energies)
    regions = regions_from_design(energies, deviations, model.noise_var)
    return Design(codebook=codebook, regions=regions, exponent=exponent,
                  case=case, scaled=scaled, cap=cap, model=model,
                  coefficients=rates.coeffs, iterations=iterations)


def min_boundary_rate(scaled, rates: RateEvaluator) -> float:
    """Worst rate over the finite interior region edges.

    The first level's left edge and the last level's right edge are
    unbounded and do not count.  No interior edges at all (a single
    level) gives +inf.
    """
    n = len(scaled)
    worst = math.inf
    for i, (energy, dl, dr) in enumerate(scaled):
        if i > 0 and math.isfinite(dl):
            worst = min(worst, rates.left(energy, dl))
        if i < n - 1 and math.isfinite(dr):
            worst = min(worst, rates.right(energy, dr))
    return worst


def achieved_exponent(design: Design, rates: RateEvaluator | None = None) -> float:
    """Recompute the design's worst boundary rate in budget units."""
    if rates is None:
        rates = RateEvaluator(design.model, design.case, design.coefficients)
    return min_boundary_rate(design.scaled, rates)
