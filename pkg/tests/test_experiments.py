"""Tests for experiment configuration, runners, CSV output and summary statistics."""

import json

import numpy as np
import pandas as pd
import pytest

from trpcalab.algebra.tproduct import basis_e
from trpcalab.experiments.config import (
    ConfigError,
    ExperimentConfig,
    format_grid,
    parse_grid,
    read_flat_config,
)
from trpcalab.experiments.runner import (
    TIMING_COLUMNS,
    build_tasks,
    columns_for,
    exp_certificate,
    exp_infty_contraction,
    exp_phase_grid,
    exp_pt_concentration,
    exp_pt_omega_norm,
    exp_sign_spectral,
    exp_spectral_deviation,
    run_experiment,
)
from trpcalab.experiments.stats import pass_rate, sign_trend_test, summarize, trend_verdict
from trpcalab.experiments.trials import spectral_deviation
from trpcalab.export.csv_export import CsvSchemaError, deterministic_view, sidecar_path, write_records
from trpcalab.services.projections import SupportSet


class TestGrids:

    def test_range_is_inclusive(self):
        assert parse_grid("0.1:0.5:0.2") == (0.1, 0.3, 0.5)
        assert parse_grid("1:5:2", int) == (1, 3, 5)
        assert parse_grid("2:3:5", int) == (2,)

    def test_list_and_scalar(self):
        assert parse_grid("0.05, 0.1") == (0.05, 0.1)
        assert parse_grid("7", int) == (7,)

    @pytest.mark.parametrize("text", ["abc", "5:1:1", "1:2", "1:4:0", "", "1,x"])
    def test_invalid(self, text):
        with pytest.raises(ConfigError):
            parse_grid(text, int)

    def test_format_grid_reads_back(self):
        values = (0.01, 0.05, 0.1, 0.3)
        assert parse_grid(format_grid(values)) == values


class TestExperimentConfig:

    def test_defaults_and_points(self):
        config = ExperimentConfig(kind="phase", n=(10, 20), r=(1, 2), rho=(0.1,))
        assert config.points == [(10, 1, 0.1), (10, 2, 0.1), (20, 1, 0.1), (20, 2, 0.1)]

    def test_flat_round_trip(self, tmp_path):
        config = ExperimentConfig(kind="certify", n=(12, 16), n3=3, r=(1,), rho=(0.05, 0.1),
                                  trials=7, seed=42, j0=5, out=tmp_path / "out.csv")
        flat = config.to_flat()
        assert all(isinstance(v, str) for v in flat.values())
        assert ExperimentConfig.from_flat(flat) == config

    def test_read_flat_config(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("# sign experiment\nkind = sign\n\nn=8,16  # two sizes\nn3=2\n"
                        "rho=0.1:0.3:0.1\nmax-iter=50\n", encoding="utf-8")
        flat = read_flat_config(path)
        assert flat == {"kind": "sign", "n": "8,16", "n3": "2", "rho": "0.1:0.3:0.1", "max_iter": "50"}
        config = ExperimentConfig.from_flat(flat)
        assert config.rho == (0.1, 0.2, 0.3)
        assert config.max_iter == 50

    def test_read_flat_config_rejects_bad_line(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("kind=sign\njust a line\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            read_flat_config(path)

    @pytest.mark.parametrize("flat", [
        {"kind": "sign", "colour": "red"},
        {"n": "10"},
        {"kind": "sign", "trials": "many"},
        {"kind": "sign", "allow_large": "maybe"},
    ])
    def test_from_flat_errors(self, flat):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_flat(flat)

    @pytest.mark.parametrize("kwargs", [
        {"kind": "bogus"},
        {"kind": "sign", "rho": (1.5,)},
        {"kind": "pt", "rho": (0.0, 0.1)},
        {"kind": "certify", "rho": (1.0,)},
        {"kind": "infty", "r": (0,)},
        {"kind": "phase", "n": (4,), "r": (5,)},
        {"kind": "phase", "trials": 0},
        {"kind": "phase", "n": (100,)},
        {"kind": "phase", "n3": 32},
        {"kind": "phase", "pass_threshold": 1.2},
        {"kind": "phase", "j0": 0},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ConfigError):
            ExperimentConfig(**kwargs)

    def test_allow_large_lifts_caps(self):
        assert ExperimentConfig(kind="phase", n=(100,), allow_large=True).n == (100,)


class TestRunner:

    def test_tasks_follow_point_then_trial_order(self):
        config = ExperimentConfig(kind="sign", n=(4, 6), r=(0,), rho=(0.1,), trials=3)
        tasks = build_tasks(config)
        assert [(t.point_index, t.trial, t.n) for t in tasks] == [
            (0, 0, 4), (0, 1, 4), (0, 2, 4), (1, 0, 6), (1, 1, 6), (1, 2, 6)
        ]

    def test_records_schema(self):
        records = exp_sign_spectral(n=(4, 6), n3=2, rho=(0.1, 0.5), trials=3, seed=1)
        assert list(records.columns) == columns_for("sign")
        assert len(records) == 2 * 2 * 3
        assert (records["experiment"] == "sign").all()
        assert (records["n1"] == records["n2"]).all()
        np.testing.assert_allclose(records["ratio"], records["spectral_norm"] / np.sqrt(records["n1"] * 2))

    def test_rerun_is_identical_apart_from_timing(self):
        config = ExperimentConfig(kind="ptomega", n=(5,), n3=2, r=(1,), rho=(0.2, 0.4), trials=2, seed=9)
        first = run_experiment(config).drop(columns=TIMING_COLUMNS)
        second = run_experiment(config).drop(columns=TIMING_COLUMNS)
        pd.testing.assert_frame_equal(first, second)

    def test_worker_pool_preserves_order(self):
        config = ExperimentConfig(kind="dev", n=(4, 5), n3=2, r=(0,), rho=(0.3,), trials=3, seed=2)
        serial = run_experiment(config).drop(columns=TIMING_COLUMNS)
        config.workers = 2
        pooled = run_experiment(config).drop(columns=TIMING_COLUMNS)
        pd.testing.assert_frame_equal(serial, pooled)

    def test_every_kind_runs_at_small_scale(self):
        options = {"max_iter": 200}
        frames = {
            "pt": exp_pt_concentration(n=5, n3=2, r=1, rho=0.3, trials=2, **options),
            "ptomega": exp_pt_omega_norm(n=5, n3=2, r=1, rho=0.3, trials=2, **options),
            "infty": exp_infty_contraction(n=5, n3=2, r=1, rho=0.3, trials=2),
            "dev": exp_spectral_deviation(n=5, n3=2, rho=0.3, trials=2),
            "certify": exp_certificate(n=6, n3=2, r=1, rho=0.1, trials=2),
            "phase": exp_phase_grid(n=5, n3=2, r=1, rho=0.1, trials=2, **options),
        }
        for kind, frame in frames.items():
            assert list(frame.columns) == columns_for(kind)
            assert len(frame) == 2

    def test_spectral_deviation_vanishes_at_full_sampling(self):
        records = exp_spectral_deviation(n=4, n3=2, rho=1.0, trials=3)
        np.testing.assert_allclose(records["deviation"], 0.0, atol=1e-12)

    @pytest.mark.parametrize("on_support", [True, False])
    @pytest.mark.parametrize("rho", [0.2, 0.5])
    def test_spectral_deviation_of_single_entry(self, on_support, rho):
        shape = (5, 5, 3)
        z = basis_e(0, 0, 0, shape)
        indices = [(0, 0, 0)] if on_support else [(1, 1, 1)]
        omega = SupportSet.from_indices(shape, indices)
        expected = abs(1.0 - 1.0 / rho) if on_support else 1.0
        assert spectral_deviation(z, omega, rho) == pytest.approx(expected)

    def test_pt_omega_at_full_sampling(self):
        records = exp_pt_omega_norm(n=4, n3=2, r=1, rho=1.0, trials=2, tol=1e-12)
        np.testing.assert_allclose(records["norm_sq"], 1.0, rtol=1e-8)
        np.testing.assert_allclose(records["excess"], 0.0, atol=1e-8)

    def test_phase_without_corruption_or_rank_succeeds(self):
        records = exp_phase_grid(n=4, n3=2, r=0, rho=0.0, trials=2)
        assert records["success"].all()
        assert (records["l_error"] == 0.0).all()


class TestCsvExport:

    def _records(self, seed=0):
        return exp_sign_spectral(n=4, n3=2, rho=0.2, trials=2, seed=seed)

    def test_append_keeps_single_header(self, tmp_path):
        path = tmp_path / "sign.csv"
        config = ExperimentConfig(kind="sign", n=(4,), n3=2, r=(0,), rho=(0.2,), trials=2)
        write_records(self._records(), path, config)
        write_records(self._records(seed=1), path, config)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == ",".join(columns_for("sign"))
        assert len(lines) == 5
        assert sum(line.startswith("experiment,") for line in lines) == 1

        sidecar = json.loads(sidecar_path(path).read_text(encoding="utf-8"))
        assert len(sidecar["runs"]) == 2
        assert ExperimentConfig.from_flat(sidecar["runs"][0]["config"]) == config

    def test_header_mismatch(self, tmp_path):
        path = tmp_path / "mixed.csv"
        write_records(self._records(), path)
        other = exp_spectral_deviation(n=4, n3=2, rho=0.2, trials=1)
        with pytest.raises(CsvSchemaError):
            write_records(other, path)

    def test_floats_use_seventeen_digits(self, tmp_path):
        path = tmp_path / "digits.csv"
        frame = pd.DataFrame({"value": [0.1], "flag": [True]})
        write_records(frame, path)
        assert path.read_text(encoding="utf-8").splitlines()[1] == "0.10000000000000001,True"

    def test_deterministic_view_matches_across_runs(self, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        write_records(self._records(seed=5), first)
        write_records(self._records(seed=5), second)
        assert deterministic_view(first) == deterministic_view(second)
        assert "runtime_s" not in deterministic_view(first).splitlines()[0]


def _trend_records(direction=1.0):
    rows = []
    for rho in (0.1, 0.2, 0.3):
        for trial in range(10):
            rows.append({"n1": 8, "n2": 8, "n3": 2, "r": 1, "rho": rho, "trial": trial, "seed": 0,
                         "ratio": direction * rho * 10 + 0.01 * trial, "spectral_norm": 1.0,
                         "runtime_s": 0.1})
    return pd.DataFrame(rows)


class TestStats:

    def test_pass_rate(self):
        records = pd.DataFrame({"passed": [True] * 9 + [False]})
        rate = pass_rate(records)
        assert rate.rate == pytest.approx(0.9)
        assert (rate.successes, rate.trials) == (9, 10)
        assert rate.ci_low < 0.9 < rate.ci_high
        assert 0.0 <= rate.ci_low and rate.ci_high <= 1.0

    def test_pass_rate_needs_records(self):
        with pytest.raises(ValueError):
            pass_rate(pd.DataFrame({"passed": pd.Series([], dtype=bool)}))

    def test_sign_trend_detects_increase(self):
        result = sign_trend_test(_trend_records(), "rho", "ratio", "increasing")
        assert result.pairs == 20
        assert result.agreeing == 20
        assert result.pvalue == pytest.approx(0.5 ** 20)
        assert result.significant

    def test_sign_trend_rejects_wrong_direction(self):
        result = sign_trend_test(_trend_records(), "rho", "ratio", "decreasing")
        assert result.agreeing == 0
        assert not result.significant
        decreasing = sign_trend_test(_trend_records(-1.0), "rho", "ratio", "decreasing")
        assert decreasing.significant

    def test_sign_trend_with_ties_only(self):
        result = sign_trend_test(_trend_records(), "rho", "spectral_norm")
        assert result.pairs == 0
        assert result.pvalue == 1.0

    def test_sign_trend_bad_direction(self):
        with pytest.raises(ValueError):
            sign_trend_test(_trend_records(), "rho", "ratio", "sideways")

    def test_summarize(self):
        tables = summarize(_trend_records(), "sign")
        assert set(tables) == {"means", "quantiles", "trends"}
        assert len(tables["means"]) == 3
        assert "runtime_s" not in tables["means"].columns
        assert list(tables["quantiles"].columns[-2:]) == ["ratio_q50", "ratio_q95"]
        assert bool(tables["trends"]["significant"].iloc[0])

    def test_summarize_pass_rates(self):
        records = exp_phase_grid(n=4, n3=2, r=0, rho=0.0, trials=3)
        tables = summarize(records, "phase")
        rates = tables["pass_rates"]
        assert set(rates["flag"]) == {"success", "converged"}
        assert (rates["rate"] == 1.0).all()

    def test_summarize_marks_expected_trend_as_holding(self):
        trends = summarize(_trend_records(), "sign")["trends"]
        assert not bool(trends["alarm"].iloc[0])
        assert trends["verdict"].iloc[0] == "holds"
        flat = summarize(_trend_records(0.0), "sign")["trends"]
        assert flat["verdict"].iloc[0] == "inconclusive"

    @pytest.mark.parametrize("growth, verdict", [(1.0, "violated"), (0.0, "holds")])
    def test_summarize_flags_growing_deviation(self, growth, verdict):
        rows = []
        for n in (8, 16, 32):
            for trial in range(10):
                rows.append({"n1": n, "n2": n, "n3": 2, "r": 0, "rho": 0.2, "trial": trial, "seed": 0,
                             "c0_sqrt": 1.0 + growth * n / 8 + 0.01 * trial, "runtime_s": 0.1})
        trends = summarize(pd.DataFrame(rows), "dev")["trends"]
        assert bool(trends["alarm"].iloc[0])
        assert trends["verdict"].iloc[0] == verdict

    def test_trend_verdict(self):
        significant = sign_trend_test(_trend_records(), "rho", "ratio", "increasing")
        absent = sign_trend_test(_trend_records(), "rho", "ratio", "decreasing")
        assert trend_verdict(significant) == "holds"
        assert trend_verdict(absent) == "inconclusive"
        assert trend_verdict(significant, alarm=True) == "violated"
        assert trend_verdict(absent, alarm=True) == "holds"


@pytest.mark.slow
class TestTrendGrids:

    def test_sign_ratio_grows_with_density(self):
        records = exp_sign_spectral(n=20, n3=4, rho=[0.01, 0.05, 0.1, 0.3], trials=10)
        trend = summarize(records, "sign")["trends"].iloc[0]
        assert trend["verdict"] == "holds"

    def test_pt_deviation_shrinks_with_density(self):
        records = exp_pt_concentration(n=24, n3=4, r=2, rho=[0.3, 0.5, 0.7], trials=10, tol=1e-4)
        trend = summarize(records, "pt")["trends"].iloc[0]
        assert trend["verdict"] == "holds"

    def test_pt_omega_excess_shrinks_with_size(self):
        records = exp_pt_omega_norm(n=[12, 24, 48], n3=4, r=2, rho=0.3, trials=16, tol=1e-6, workers=4)
        q95 = records.groupby("n1")["excess"].quantile(0.95).sort_index()
        assert q95.is_monotonic_decreasing

    def test_spectral_deviation_constant_stays_bounded(self):
        records = exp_spectral_deviation(n=[16, 32, 64], n3=4, rho=0.2, trials=10)
        medians = records.groupby("n1")["c0_sqrt"].median()
        assert medians[64] <= 1.1 * medians[16]
        trend = summarize(records, "dev")["trends"].iloc[0]
        assert trend["verdict"] == "holds"
