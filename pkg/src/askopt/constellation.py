"""Energy codebooks and symbol sets for one- and two-sided ASK.

A codebook stores the ordered level energies.  One-sided layouts use
every level once (amplitudes sqrt(E_m) >= 0); two-sided layouts mirror
each level across zero, so M symbols share M/2 energies.  The module
also provides the traditional equispaced baselines, the average-energy
caps they saturate, and a plain-text (JSON) file format that round
trips every float bit-exactly.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

__all__ = [
    "Codebook",
    "SymbolSet",
    "traditional",
    "average_energy",
    "energy_cap",
    "symbols",
    "write_constellation_file",
    "read_constellation_file",
]

SIDES = ("one", "two")


def _level_count(side: str, m: int) -> int:
    return m if side == "one" else m // 2


def _check_side_m(side: str, m: int) -> None:
    if side not in SIDES:
        raise ValueError(f"side must be 'one' or 'two', got {side!r}")
    if m < 2:
        raise ValueError("constellation size must be at least 2")
    if side == "two" and m % 2 != 0:
        raise ValueError("two-sided constellations need an even size")


@dataclass(frozen=True)
class Codebook:
    """Ordered energy levels of a constellation.

    side     : "one" or "two".
    m        : constellation size M (number of symbols).
    energies : strictly increasing level energies; m of them for
               one-sided, m/2 for two-sided.
    """

    side: str
    m: int
    energies: tuple

    def __post_init__(self):
        _check_side_m(self.side, self.m)
        want = _level_count(self.side, self.m)
        if len(self.energies) != want:
            raise ValueError(
                f"expected {want} energies for side={self.side}, M={self.m}, "
                f"got {len(self.energies)}")
        object.__setattr__(self, "energies", tuple(float(e) for e in self.energies))
        if self.energies[0] < 0:
            raise ValueError("energies must be nonnegative")
        for a, b in zip(self.energies, self.energies[1:]):
            if not b > a:
                raise ValueError("energies must be strictly increasing")
        if self.side == "two" and self.energies[0] == 0.0:
            warnings.warn("two-sided codebook with a zero level is degenerate "
                          "(the two innermost symbols coincide)")

    @property
    def level_count(self) -> int:
        return len(self.energies)


@dataclass(frozen=True)
class SymbolSet:
    """Transmit amplitudes in increasing order."""

    amplitudes: tuple


def traditional(side: str, m: int) -> Codebook:
    """Equispaced baseline: amplitude step 2, around 0 when two-sided."""
    _check_side_m(side, m)
    if side == "one":
        energies = [4.0 * (i - 1) ** 2 for i in range(1, m + 1)]
    else:
        energies = [4.0 * i**2 for i in range(1, m // 2 + 1)]
    return Codebook(side=side, m=m, energies=tuple(energies))


def average_energy(cb: Codebook) -> float:
    """Mean symbol energy; two-sided symbols use each level twice."""
    total = sum(cb.energies)
    if cb.side == "two":
        total *= 2.0
    return total / cb.m


def energy_cap(side: str, m: int) -> float:
    """Average-energy budget the traditional layout saturates exactly."""
    _check_side_m(side, m)
    if side == "one":
        return 2.0 * (m - 1) * (2 * m - 1) / 3.0
    return (m + 1) * (m + 2) / 3.0


def symbols(cb: Codebook) -> SymbolSet:
    """Amplitude list in the detector's symbol-index order."""
    roots = [math.sqrt(e) for e in cb.energies]
    if cb.side == "one":
        return SymbolSet(amplitudes=tuple(roots))
    neg = [-a for a in reversed(roots)]
    return SymbolSet(amplitudes=tuple(neg + roots))


def _encode_bound(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def _decode_bound(x):
    if isinstance(x, str):
        v = float(x)
        if not math.isinf(v):
            raise ValueError(f"unexpected string bound {x!r}")
        return v
    return float(x)


def write_constellation_file(path, *, side: str, m: int, energies,
                             regions=None, meta=None) -> None:
    """Write a constellation snapshot.

    regions, when given, is an iterable of (low, high) statistic-axis
    bounds; infinities become the literal strings "inf" / "-inf".
    Floats are serialized with full round-trip precision.
    """
    _check_side_m(side, m)
    payload = {
        "side": side,
        "M": int(m),
        "energies": [float(e) for e in energies],
    }
    if regions is not None:
        payload["regions"] = [[_encode_bound(lo), _encode_bound(hi)]
                              for lo, hi in regions]
    if meta is not None:
        payload["meta"] = dict(meta)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def read_constellation_file(path) -> dict:
    """Read a snapshot back; returns a dict with parsed float bounds."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    for key in ("side", "M", "energies"):
        if key not in payload:
            raise ValueError(f"constellation file missing field {key!r}")
    payload["M"] = int(payload["M"])
    payload["energies"] = [float(e) for e in payload["energies"]]
    if "regions" in payload:
        payload["regions"] = [(_decode_bound(lo), _decode_bound(hi))
                              for lo, hi in payload["regions"]]
    return payload
