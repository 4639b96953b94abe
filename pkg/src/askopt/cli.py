"""Command-line front end.

Subcommands: moments, optimize, simulate, sweep, compare-constellations.
Every option can also come from a --config file of key=value lines;
explicit command-line flags win over the file.  Exit codes: 0 success,
2 usage or parameter errors, 3 numerical failure (or a sweep whose
cells all failed), 4 a sweep that lost some cells but not all.
"""

from __future__ import annotations

import argparse
import math
import sys
from types import SimpleNamespace

from .channel import ChannelConfig, compute_stats
from .constellation import (
    energy_cap,
    read_constellation_file,
    symbols,
    traditional,
    write_constellation_file,
)
from .designer import InfeasibleExponent, min_boundary_rate, optimize
from .detector import midpoint_regions, ser_upper_bound
from .ratefn import ConvergenceError, RateEvaluator, RateModel, variance_coefficients
from .simulator import (
    SimConfig,
    noise_variance_for_snr,
    rows_to_csv,
    ser_monte_carlo,
    sweep,
)

__all__ = ["main"]


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_grid(text: str) -> list:
    """Parse "start:step:stop" (inclusive) or a comma list of floats."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:step:stop, got {text!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        values = []
        k = 0
        # Tolerant endpoint so 0:5:50 includes 50 despite round-off.
        while start + k * step <= stop + 1e-9 * step:
            values.append(start + k * step)
            k += 1
        if not values:
            raise ValueError(f"empty grid {text!r}")
        return values
    values = [float(p) for p in text.split(",") if p.strip()]
    if not values:
        raise ValueError(f"empty grid {text!r}")
    return values


def _parse_int_list(text: str) -> list:
    values = [int(p) for p in text.split(",") if p.strip()]
    if not values:
        raise ValueError(f"empty list {text!r}")
    return values


class _Command:
    """Subparser wrapper that records defaults for the config merge."""

    def __init__(self, subparsers, name: str, help_text: str):
        self.parser = subparsers.add_parser(name, help=help_text,
                                            description=help_text)
        self.parser.add_argument(
            "--config", metavar="FILE", default=None,
            help="key=value file supplying defaults; flags given here win")
        self.defaults = {}
        self.types = {}
        self.choices = {}

    def add(self, flag: str, *, type=str, default=None, choices=None,
            help: str | None = None):
        dest = flag.lstrip("-").replace("-", "_")
        self.defaults[dest] = default
        self.types[dest] = type
        if choices is not None:
            self.choices[dest] = tuple(choices)
        self.parser.add_argument(flag, dest=dest, type=type, choices=choices,
                                 default=argparse.SUPPRESS, help=help)

    def add_flag(self, flag: str, *, help: str | None = None):
        dest = flag.lstrip("-").replace("-", "_")
        self.defaults[dest] = False
        self.types[dest] = _parse_bool
        self.parser.add_argument(flag, dest=dest, action="store_true",
                                 default=argparse.SUPPRESS, help=help)


def _read_config(path: str) -> dict:
    entries = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            entries[key.strip().replace("-", "_")] = value.strip()
    return entries


def _resolve(args: argparse.Namespace, cmd: _Command) -> SimpleNamespace:
    merged = dict(cmd.defaults)
    if getattr(args, "config", None):
        for key, raw in _read_config(args.config).items():
            if key not in cmd.defaults:
                raise ValueError(f"unknown config key {key!r}")
            merged[key] = cmd.types[key](raw)
    for key, value in vars(args).items():
        if key not in ("command", "config"):
            merged[key] = value
    for key, allowed in cmd.choices.items():
        if merged[key] not in allowed:
            raise ValueError(f"{key} must be one of {allowed}, "
                             f"got {merged[key]!r}")
    return SimpleNamespace(**merged)


def _add_channel_options(cmd: _Command):
    cmd.add("--n-elements", type=int, default=128,
            help="number of reflecting elements (default 128)")
    cmd.add("--k1", type=float, default=0.0,
            help="Rician factor of the first hop (default 0)")
    cmd.add("--k2", type=float, default=0.0,
            help="Rician factor of the second hop (default 0)")
    cmd.add("--sigma-h-sq", type=float, default=1.0,
            help="per-hop scattered-power scale (default 1)")


def _add_design_options(cmd: _Command):
    cmd.add("--side", type=str, default="one", choices=("one", "two"),
            help="one-sided (nonnegative) or two-sided amplitudes")
    cmd.add("--m", type=int, default=4, help="constellation size (default 4)")
    cmd.add("--case", type=str, default="exact",
            choices=("exact", "fourth_moment"),
            help="rate model used by the designer (default exact)")
    cmd.add("--snr-db", type=float, default=30.0,
            help="average received SNR in dB (default 30)")
    cmd.add("--fourth-moment", type=float, default=None,
            help="override the normalized fourth moment of the gain")
    cmd.add_flag("--paper-convention",
                 help="legacy variance coefficients for the quadratic rate")
    cmd.add("--eps-exponent", type=float, default=1e-8,
            help="bisection tolerance on the exponent (default 1e-8)")
    cmd.add("--eps-budget", type=float, default=1e-6,
            help="tolerance on the unit energy budget (default 1e-6)")


def _add_sim_options(cmd: _Command):
    cmd.add("--trials", type=int, default=1_000_000,
            help="Monte Carlo trials (default 1e6)")
    cmd.add("--seed", type=int, default=0, help="random seed (default 0)")
    cmd.add("--workers", type=int, default=1,
            help="worker processes; the result does not depend on this")
    cmd.add("--channel-model", type=str, default="exact",
            choices=("exact", "gauss"),
            help="draw the cascaded gain exactly or from its normal fit")


def _build_cli():
    parser = argparse.ArgumentParser(
        prog="askopt",
        description="Design and simulate amplitude constellations for "
                    "noncoherent energy-detection links through a "
                    "reconfigurable reflecting surface.")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="COMMAND")
    commands = {}

    cmd = _Command(sub, "moments", "print cascaded-gain statistics")
    _add_channel_options(cmd)
    commands["moments"] = cmd

    cmd = _Command(sub, "optimize", "design a max-min exponent constellation")
    _add_channel_options(cmd)
    _add_design_options(cmd)
    cmd.add("--output", type=str, default=None,
            help="write the constellation to this JSON file")
    commands["optimize"] = cmd

    cmd = _Command(sub, "simulate", "Monte Carlo error rate of one cell")
    _add_channel_options(cmd)
    _add_design_options(cmd)
    _add_sim_options(cmd)
    cmd.add("--scheme", type=str, default="opt", choices=("opt", "trad"),
            help="optimized or traditional equispaced layout")
    commands["simulate"] = cmd

    cmd = _Command(sub, "sweep", "simulate both schemes over an SNR grid")
    _add_channel_options(cmd)
    _add_design_options(cmd)
    _add_sim_options(cmd)
    cmd.add("--snr-grid", type=str, default="0:5:50",
            help='inclusive "start:step:stop" or comma list (default 0:5:50)')
    cmd.add("--n-list", type=str, default=None,
            help="comma list of element counts; overrides --n-elements")
    cmd.add("--schemes", type=str, default="trad,opt",
            help="comma list drawn from trad,opt (default both)")
    cmd.add("--output", type=str, default=None,
            help="CSV output path (default stdout)")
    cmd.add("--snapshot-dir", type=str, default=None,
            help="directory for per-cell constellation JSON snapshots")
    commands["sweep"] = cmd

    cmd = _Command(sub, "compare-constellations",
                   "print two stored constellations side by side")
    cmd.parser.add_argument("paths", nargs=2, metavar="FILE",
                            help="constellation JSON files")
    commands["compare-constellations"] = cmd

    return parser, commands


def _model_for(opts):
    channel = ChannelConfig(n_elements=opts.n_elements, k1=opts.k1,
                            k2=opts.k2, sigma_h_sq=opts.sigma_h_sq)
    stats = compute_stats(channel)
    cap = energy_cap(opts.side, opts.m)
    sigma_n_sq = noise_variance_for_snr(opts.snr_db, cap, stats)
    return channel, stats, cap, sigma_n_sq, RateModel.from_stats(stats, sigma_n_sq)


def _rates_for(opts, model):
    if opts.case == "exact":
        return RateEvaluator(model)
    coeffs = variance_coefficients(model, opts.fourth_moment,
                                   paper_convention=opts.paper_convention)
    return RateEvaluator(model, opts.case, coeffs)


def _scaled_rows(codebook, regions, cap):
    return [(e / cap, dl / cap, dr / cap)
            for e, (dl, dr) in zip(codebook.energies, regions.deviations)]


def _print_levels(codebook, regions):
    edges = [0.0, *regions.boundaries, math.inf]
    for i, energy in enumerate(codebook.energies):
        print(f"level {i}: energy = {energy:.12g}  "
              f"region = [{edges[i]:.12g}, {edges[i + 1]:.12g})")


def _cmd_moments(opts) -> int:
    channel = ChannelConfig(n_elements=opts.n_elements, k1=opts.k1,
                            k2=opts.k2, sigma_h_sq=opts.sigma_h_sq)
    stats = compute_stats(channel)
    print(f"alpha = {stats.alpha:.12g}")
    print(f"beta = {stats.beta:.12g}")
    print(f"mean = {stats.mean:.12g}")
    print(f"variance = {stats.variance:.12g}")
    print(f"second_moment = {stats.second_moment:.12g}")
    print(f"normalized_fourth_moment = {stats.normalized_fourth_moment:.12g}")
    return 0


def _cmd_optimize(opts) -> int:
    channel, stats, cap, sigma_n_sq, model = _model_for(opts)
    design = optimize(opts.side, opts.m, model, opts.case,
                      eps_exponent=opts.eps_exponent,
                      eps_budget=opts.eps_budget,
                      normalized_fourth_moment=opts.fourth_moment,
                      paper_convention=opts.paper_convention)
    avg = sum(design.codebook.energies)
    if opts.side == "two":
        avg *= 2.0
    avg /= opts.m
    print(f"side = {opts.side}")
    print(f"M = {opts.m}")
    print(f"case = {opts.case}")
    print(f"N = {opts.n_elements}")
    print(f"snr_db = {opts.snr_db:.12g}")
    print(f"sigma_n_sq = {sigma_n_sq:.12g}")
    print(f"exponent = {design.exponent:.12g}")
    print(f"iterations = {design.iterations}")
    print(f"average_energy = {avg:.12g}")
    print(f"energy_budget = {cap:.12g}")
    print(f"ser_bound = {ser_upper_bound(design.regions, model, opts.side):.6g}")
    _print_levels(design.codebook, design.regions)
    if opts.output:
        pairs = list(zip([0.0, *design.regions.boundaries],
                         [*design.regions.boundaries, math.inf]))
        write_constellation_file(
            opts.output, side=opts.side, m=opts.m,
            energies=design.codebook.energies, regions=pairs,
            meta={"case": opts.case, "snr_db": opts.snr_db,
                  "N": opts.n_elements, "sigma_n_sq": sigma_n_sq,
                  "exponent": design.exponent})
        print(f"wrote {opts.output}")
    return 0


def _cmd_simulate(opts) -> int:
    channel, stats, cap, sigma_n_sq, model = _model_for(opts)
    rates = _rates_for(opts, model)
    if opts.scheme == "opt":
        design = optimize(opts.side, opts.m, model, opts.case,
                          eps_exponent=opts.eps_exponent,
                          eps_budget=opts.eps_budget,
                          normalized_fourth_moment=opts.fourth_moment,
                          paper_convention=opts.paper_convention)
        codebook, regions = design.codebook, design.regions
        exponent = design.exponent
    else:
        codebook = traditional(opts.side, opts.m)
        regions = midpoint_regions(codebook, model.noise_var)
        exponent = min_boundary_rate(_scaled_rows(codebook, regions, cap),
                                     rates)
    cfg = SimConfig(trials=opts.trials, seed=opts.seed, snr_db=opts.snr_db,
                    channel_model=opts.channel_model, workers=opts.workers)
    est = ser_monte_carlo(codebook, regions, channel, cfg,
                          sigma_n_sq=sigma_n_sq)
    print(f"scheme = {opts.scheme}")
    print(f"ser = {est.ser:.12g}")
    print(f"stderr = {est.stderr:.12g}")
    print(f"errors = {est.errors}")
    print(f"trials = {est.trials}")
    print(f"ser_bound = {ser_upper_bound(regions, model, opts.side):.6g}")
    print(f"exponent = {exponent:.12g}")
    if est.low_confidence:
        print("warning: fewer than 10 errors observed; the estimate is "
              "low-confidence", file=sys.stderr)
    return 0


def _cmd_sweep(opts) -> int:
    snr_grid = parse_grid(opts.snr_grid)
    if opts.n_list:
        n_list = _parse_int_list(opts.n_list)
    else:
        n_list = [opts.n_elements]
    schemes = tuple(s.strip() for s in opts.schemes.split(",") if s.strip())
    if not schemes:
        raise ValueError("schemes must name at least one of trad,opt")
    cfg = SimConfig(trials=opts.trials, seed=opts.seed, snr_db=snr_grid[0],
                    channel_model=opts.channel_model, workers=opts.workers)
    rows = sweep(opts.side, opts.m, opts.case, snr_grid, n_list, cfg,
                 k1=opts.k1, k2=opts.k2, sigma_h_sq=opts.sigma_h_sq,
                 schemes=schemes,
                 normalized_fourth_moment=opts.fourth_moment,
                 paper_convention=opts.paper_convention,
                 eps_exponent=opts.eps_exponent, eps_budget=opts.eps_budget,
                 snapshot_dir=opts.snapshot_dir)
    skip = ("output", "config")
    comments = [f"{k} = {v}" for k, v in sorted(vars(opts).items())
                if k not in skip]
    text = rows_to_csv(rows, comments)
    if opts.output:
        with open(opts.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    failed = [r for r in rows if r.error is not None]
    for row in failed:
        print(f"cell snr={row.snr_db:g} N={row.n_elements} "
              f"scheme={row.scheme} failed: {row.error}", file=sys.stderr)
    if failed and len(failed) == len(rows):
        return 3
    if failed:
        return 4
    return 0


def _describe(payload: dict):
    side = payload["side"]
    m = payload["M"]
    energies = payload["energies"]
    factor = 2.0 if side == "two" else 1.0
    avg = factor * sum(energies) / m
    print(f"  side = {side}, M = {m}, levels = {len(energies)}")
    print(f"  average_energy = {avg:.12g}")
    print(f"  energies = {', '.join('%.12g' % e for e in energies)}")
    amps = [math.sqrt(e) for e in energies]
    if side == "two":
        amps = [-a for a in reversed(amps)] + amps
    print(f"  amplitudes = {', '.join('%.12g' % a for a in amps)}")
    if len(energies) > 1:
        gaps = [b - a for a, b in zip(energies, energies[1:])]
        print(f"  min_gap = {min(gaps):.12g}")
    meta = payload.get("meta")
    if meta:
        joined = ", ".join(f"{k}={v}" for k, v in sorted(meta.items()))
        print(f"  meta: {joined}")


def _cmd_compare(opts) -> int:
    payloads = [read_constellation_file(p) for p in opts.paths]
    for path, payload in zip(opts.paths, payloads):
        print(f"{path}:")
        _describe(payload)
    a, b = payloads
    if a["side"] == b["side"] and a["M"] == b["M"]:
        print("level energy differences (second minus first):")
        for i, (ea, eb) in enumerate(zip(a["energies"], b["energies"])):
            print(f"  level {i}: {eb - ea:+.12g}")
    else:
        print("layouts differ in side or M; no level-wise comparison")
    return 0


_HANDLERS = {
    "moments": _cmd_moments,
    "optimize": _cmd_optimize,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "compare-constellations": _cmd_compare,
}


def main(argv=None) -> int:
    parser, commands = _build_cli()
    args = parser.parse_args(argv)
    cmd = commands[args.command]
    try:
        opts = _resolve(args, cmd)
    except (ValueError, OSError) as exc:
        print(f"askopt {args.command}: {exc}", file=sys.stderr)
        return 2
    try:
        return _HANDLERS[args.command](opts)
    except (ConvergenceError, InfeasibleExponent, FloatingPointError) as exc:
        print(f"askopt {args.command}: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"askopt {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
