import math

import pytest

from askopt.channel import ChannelConfig, compute_stats
from askopt.constellation import energy_cap, traditional
from askopt.designer import optimize
from askopt.detector import midpoint_regions
from askopt.ratefn import RateModel
from askopt.simulator import (
    CSV_HEADER,
    SerEstimate,
    SimConfig,
    SweepRow,
    crossover_snr,
    noise_variance_for_snr,
    rows_to_csv,
    ser_monte_carlo,
    sweep,
)

CHANNEL = ChannelConfig(n_elements=8)
STATS = compute_stats(CHANNEL)


def setup_cell(side="one", m=4, snr_db=20.0, scheme="trad"):
    sigma_n_sq = noise_variance_for_snr(snr_db, energy_cap(side, m), STATS)
    model = RateModel.from_stats(STATS, sigma_n_sq)
    if scheme == "opt":
        design = optimize(side, m, model)
        return design.codebook, design.regions, sigma_n_sq
    codebook = traditional(side, m)
    return codebook, midpoint_regions(codebook, model.noise_var), sigma_n_sq


class TestNoiseVariance:
    def test_hand_value(self):
        class Fake:
            variance = 1.0
            mean = 3.0

        # (2*1 + 9) * 2 / 10^(10/10) = 2.2
        assert noise_variance_for_snr(10.0, 2.0, Fake()) == pytest.approx(
            2.2, rel=1e-14)

    def test_monotone_in_snr(self):
        lo = noise_variance_for_snr(0.0, 14.0, STATS)
        hi = noise_variance_for_snr(30.0, 14.0, STATS)
        assert hi < lo

    def test_rejects_bad_energy(self):
        with pytest.raises(ValueError):
            noise_variance_for_snr(10.0, 0.0, STATS)


class TestSimConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SimConfig(trials=0)
        with pytest.raises(ValueError):
            SimConfig(seed=-1)
        with pytest.raises(ValueError):
            SimConfig(channel_model="laplace")
        with pytest.raises(ValueError):
            SimConfig(workers=0)

    def test_low_confidence_flag(self):
        assert SerEstimate(ser=1e-6, stderr=1e-6, errors=3,
                           trials=3_000_000).low_confidence
        assert not SerEstimate(ser=1e-3, stderr=1e-4, errors=300,
                               trials=300_000).low_confidence


class TestSerMonteCarlo:
    def test_same_seed_same_result(self):
        codebook, regions, sn2 = setup_cell()
        cfg = SimConfig(trials=100_000, seed=9, snr_db=20.0)
        a = ser_monte_carlo(codebook, regions, CHANNEL, cfg, sigma_n_sq=sn2)
        b = ser_monte_carlo(codebook, regions, CHANNEL, cfg, sigma_n_sq=sn2)
        assert a == b

    def test_worker_count_invariant(self):
        codebook, regions, sn2 = setup_cell()
        base = None
        for workers in (1, 2, 3):
            cfg = SimConfig(trials=150_000, seed=4, snr_db=20.0,
                            workers=workers)
            est = ser_monte_carlo(codebook, regions, CHANNEL, cfg,
                                  sigma_n_sq=sn2)
            if base is None:
                base = est
            else:
                assert est == base

    def test_seed_changes_result(self):
        codebook, regions, sn2 = setup_cell()
        a = ser_monte_carlo(codebook, regions, CHANNEL,
                            SimConfig(trials=100_000, seed=1, snr_db=20.0),
                            sigma_n_sq=sn2)
        b = ser_monte_carlo(codebook, regions, CHANNEL,
                            SimConfig(trials=100_000, seed=2, snr_db=20.0),
                            sigma_n_sq=sn2)
        assert a.errors != b.errors

    def test_extreme_snr_limits(self):
        # Under the gain model the design assumes, errors vanish at high
        # SNR; with so few elements the exact channel keeps a visible
        # tail floor instead, so the clean limit uses the gauss model.
        codebook, regions, sn2 = setup_cell(snr_db=80.0, scheme="opt")
        est = ser_monte_carlo(codebook, regions, CHANNEL,
                              SimConfig(trials=30_000, seed=0, snr_db=80.0,
                                        channel_model="gauss"),
                              sigma_n_sq=sn2)
        assert est.ser < 1e-3
        codebook, regions, sn2 = setup_cell(snr_db=-30.0)
        est = ser_monte_carlo(codebook, regions, CHANNEL,
                              SimConfig(trials=30_000, seed=0, snr_db=-30.0),
                              sigma_n_sq=sn2)
        assert est.ser > 0.5

    def test_two_sided_runs(self):
        codebook, regions, sn2 = setup_cell(side="two", snr_db=25.0,
                                            scheme="opt")
        est = ser_monte_carlo(codebook, regions, CHANNEL,
                              SimConfig(trials=60_000, seed=3, snr_db=25.0),
                              sigma_n_sq=sn2)
        assert 0.0 <= est.ser < 0.5
        assert est.stderr == pytest.approx(
            math.sqrt(est.ser * (1 - est.ser) / est.trials), rel=1e-12)

    def test_gauss_close_to_exact_for_many_elements(self):
        channel = ChannelConfig(n_elements=128)
        stats = compute_stats(channel)
        sn2 = noise_variance_for_snr(20.0, 14.0, stats)
        model = RateModel.from_stats(stats, sn2)
        codebook = traditional("one", 4)
        regions = midpoint_regions(codebook, model.noise_var)
        exact = ser_monte_carlo(
            codebook, regions, channel,
            SimConfig(trials=100_000, seed=6, snr_db=20.0),
            sigma_n_sq=sn2)
        gauss = ser_monte_carlo(
            codebook, regions, channel,
            SimConfig(trials=100_000, seed=6, snr_db=20.0,
                      channel_model="gauss"),
            sigma_n_sq=sn2)
        assert gauss.ser == pytest.approx(exact.ser, rel=0.15)

    def test_default_noise_from_snr(self):
        codebook, regions, sn2 = setup_cell(snr_db=20.0)
        cfg = SimConfig(trials=70_000, seed=5, snr_db=20.0)
        implicit = ser_monte_carlo(codebook, regions, CHANNEL, cfg)
        explicit = ser_monte_carlo(codebook, regions, CHANNEL, cfg,
                                   sigma_n_sq=sn2)
        # The traditional codebook's average energy equals the cap, so
        # the implied noise level matches the explicit one.
        assert implicit == explicit

    def test_level_count_mismatch_rejected(self):
        codebook, _, sn2 = setup_cell()
        _, other_regions, _ = setup_cell(m=8)
        with pytest.raises(ValueError):
            ser_monte_carlo(codebook, other_regions, CHANNEL,
                            SimConfig(trials=1000, snr_db=20.0),
                            sigma_n_sq=sn2)


class TestSweep:
    def test_rows_complete_and_ordered(self):
        cfg = SimConfig(trials=40_000, seed=1)
        rows = sweep("one", 4, "exact", [15.0, 25.0], [8], cfg)
        assert len(rows) == 4
        assert [(r.snr_db, r.scheme) for r in rows] == [
            (15.0, "trad"), (15.0, "opt"), (25.0, "trad"), (25.0, "opt")]
        for row in rows:
            assert row.error is None
            assert row.ser is not None
            assert row.bound is not None
            assert row.exponent > 0

    def test_failed_cell_isolated(self):
        cfg = SimConfig(trials=10_000, seed=1)
        rows = sweep("one", 4, "exact", [20.0], [8], cfg,
                     schemes=("trad", "bogus"))
        good = [r for r in rows if r.error is None]
        bad = [r for r in rows if r.error is not None]
        assert len(good) == 1 and len(bad) == 1
        assert bad[0].scheme == "bogus"
        assert bad[0].ser is None and bad[0].bound is None

    def test_snapshots_written(self, tmp_path):
        cfg = SimConfig(trials=20_000, seed=1)
        sweep("two", 4, "exact", [20.0], [8], cfg, snapshot_dir=tmp_path)
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == ["const_two4_N8_snr20_opt.json",
                         "const_two4_N8_snr20_trad.json"]

    def test_quadratic_case_runs(self):
        cfg = SimConfig(trials=20_000, seed=2)
        rows = sweep("one", 4, "fourth_moment", [20.0], [8], cfg,
                     schemes=("opt",))
        assert rows[0].error is None
        assert rows[0].case == "fourth_moment"


class TestCsv:
    def test_header_and_comments(self):
        rows = [SweepRow(snr_db=5.0, n_elements=8, m=4, side="one",
                         case="exact", scheme="trad", ser=0.125,
                         stderr=0.001, bound=0.5, exponent=0.25, seed=7,
                         trials=1000)]
        text = rows_to_csv(rows, ["alpha = 1", "beta = 2"])
        lines = text.splitlines()
        assert lines[0] == "# alpha = 1"
        assert lines[1] == "# beta = 2"
        assert lines[2] == CSV_HEADER
        assert lines[3].startswith("5,8,4,one,exact,trad,0.125,")

    def test_full_precision_round_trip(self):
        value = 1.0 / 3.0
        rows = [SweepRow(snr_db=12.5, n_elements=8, m=4, side="one",
                         case="exact", scheme="opt", ser=value,
                         stderr=value / 7, bound=value / 3, exponent=value,
                         seed=0, trials=10)]
        fields = rows_to_csv(rows).splitlines()[1].split(",")
        assert float(fields[6]) == value
        assert float(fields[9]) == value

    def test_failed_row_has_empty_metrics(self):
        rows = [SweepRow(snr_db=5.0, n_elements=8, m=4, side="one",
                         case="exact", scheme="opt", ser=None, stderr=None,
                         bound=None, exponent=None, seed=7, trials=1000,
                         error="boom")]
        line = rows_to_csv(rows).splitlines()[1]
        assert line == "5,8,4,one,exact,opt,,,,,7,1000"

    def test_infinite_exponent_serializes(self):
        rows = [SweepRow(snr_db=5.0, n_elements=8, m=2, side="two",
                         case="exact", scheme="opt", ser=0.0, stderr=0.0,
                         bound=0.0, exponent=math.inf, seed=7, trials=1000)]
        line = rows_to_csv(rows).splitlines()[1]
        assert ",inf," in line


def _pair(snr, trad, opt):
    rows = []
    for scheme, ser in (("trad", trad), ("opt", opt)):
        rows.append(SweepRow(snr_db=snr, n_elements=8, m=4, side="one",
                             case="exact", scheme=scheme, ser=ser,
                             stderr=0.0, bound=1.0, exponent=1.0, seed=0,
                             trials=100))
    return rows


class TestCrossover:
    def test_simple_crossover(self):
        rows = _pair(0.0, 0.3, 0.4) + _pair(10.0, 0.1, 0.05) + \
            _pair(20.0, 0.01, 0.001)
        assert crossover_snr(rows) == 10.0

    def test_no_crossover(self):
        rows = _pair(0.0, 0.3, 0.4) + _pair(10.0, 0.1, 0.2)
        assert crossover_snr(rows) is None

    def test_non_persistent_win_ignored(self):
        # A dip where opt wins but loses again later does not count.
        rows = _pair(0.0, 0.3, 0.2) + _pair(10.0, 0.1, 0.2) + \
            _pair(20.0, 0.01, 0.001)
        assert crossover_snr(rows) == 20.0

    def test_failed_cells_break_streak(self):
        rows = _pair(0.0, 0.3, 0.4) + _pair(20.0, 0.01, 0.001)
        rows.append(SweepRow(snr_db=10.0, n_elements=8, m=4, side="one",
                             case="exact", scheme="trad", ser=None,
                             stderr=None, bound=None, exponent=None,
                             seed=0, trials=100, error="x"))
        rows.append(SweepRow(snr_db=10.0, n_elements=8, m=4, side="one",
                             case="exact", scheme="opt", ser=0.05,
                             stderr=0.0, bound=1.0, exponent=1.0, seed=0,
                             trials=100))
        assert crossover_snr(rows) == 20.0

    def test_tie_does_not_count(self):
        rows = _pair(0.0, 0.3, 0.3)
        assert crossover_snr(rows) is None
