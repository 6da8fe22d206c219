import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from tvalpha.empirical import PanelSource, box_pierce, ingest_and_balance, run_empirical
from tvalpha.errors import ConfigError, DimensionError, DomainError


def write_panel(tmp_path, T=30, N=3, gap_asset=None, seed=0):
    """Toy weekly CSV pair; optionally punch a hole into one asset."""
    rng = np.random.default_rng(seed)
    dates = pd.date_range("2021-01-08", periods=T, freq="W-FRI")
    rets = pd.DataFrame(
        rng.standard_normal((T, N)) * 0.02, columns=[f"A{i}" for i in range(N)]
    )
    if gap_asset is not None:
        rets.iloc[T // 2, gap_asset] = np.nan
    rets.insert(0, "date", dates.strftime("%Y-%m-%d"))
    factors = pd.DataFrame(
        {
            "date": dates.strftime("%Y-%m-%d"),
            "MKT": rng.standard_normal(T) * 0.02,
            "SMB": rng.standard_normal(T) * 0.01,
            "HML": rng.standard_normal(T) * 0.01,
            "RF": np.full(T, 0.0005),
        }
    )
    rpath = tmp_path / "returns.csv"
    fpath = tmp_path / "factors.csv"
    rets.to_csv(rpath, index=False)
    factors.to_csv(fpath, index=False)
    return PanelSource(returns_csv=str(rpath), factors_csv=str(fpath))


class TestIngest:
    def test_complete_panel_keeps_all(self, tmp_path):
        src = write_panel(tmp_path, T=30, N=3)
        panel, factors = ingest_and_balance(src)
        assert panel.N == 3 and panel.T == 30
        assert factors.d == 3

    def test_gap_drops_asset(self, tmp_path):
        src = write_panel(tmp_path, T=30, N=3, gap_asset=1)
        panel, _ = ingest_and_balance(src)
        assert panel.N == 2
        assert panel.assets == ("A0", "A2")

    def test_excess_returns(self, tmp_path):
        src = write_panel(tmp_path, T=25, N=2, seed=3)
        panel, _ = ingest_and_balance(src)
        raw = pd.read_csv(src.returns_csv)
        assert_allclose(panel.values[:, 0], raw["A0"].to_numpy() - 0.0005, rtol=1e-12)

    def test_percent_units(self, tmp_path):
        src = write_panel(tmp_path, T=25, N=2, seed=4)
        scaled = PanelSource(src.returns_csv, src.factors_csv, percent_units=True)
        _, factors = ingest_and_balance(scaled)
        _, raw_factors = ingest_and_balance(src)
        assert_allclose(factors.values, raw_factors.values / 100.0, rtol=1e-12)

    def test_bad_date_reports_line(self, tmp_path):
        src = write_panel(tmp_path, T=10, N=2)
        lines = open(src.returns_csv).read().splitlines()
        lines[3] = "not-a-date" + lines[3][10:]
        open(src.returns_csv, "w").write("\n".join(lines))
        with pytest.raises(ConfigError, match="line 4"):
            ingest_and_balance(src)

    def test_no_overlap(self, tmp_path):
        src = write_panel(tmp_path, T=10, N=2)
        factors = pd.read_csv(src.factors_csv)
        factors["date"] = pd.date_range("1990-01-05", periods=10, freq="W-FRI").strftime(
            "%Y-%m-%d"
        )
        factors.to_csv(src.factors_csv, index=False)
        with pytest.raises(DimensionError):
            ingest_and_balance(src)

    def test_missing_factor_column(self, tmp_path):
        src = write_panel(tmp_path, T=10, N=2)
        factors = pd.read_csv(src.factors_csv).drop(columns=["SMB"])
        factors.to_csv(src.factors_csv, index=False)
        with pytest.raises(ConfigError, match="SMB"):
            ingest_and_balance(src)

    def test_ingestion_idempotent(self, tmp_path):
        src = write_panel(tmp_path, T=30, N=3, seed=6)
        p1, f1 = ingest_and_balance(src)
        p2, f2 = ingest_and_balance(src)
        assert np.array_equal(p1.values, p2.values)
        assert np.array_equal(f1.values, f2.values)


class TestBoxPierce:
    def test_null_calibration(self):
        rng = np.random.default_rng(42)
        reps = 1000
        rejections = sum(
            box_pierce(rng.standard_normal(1000), 10) < 0.05 for _ in range(reps)
        )
        assert 0.03 <= rejections / reps <= 0.07

    def test_ar1_power(self):
        rng = np.random.default_rng(43)
        rejections = 0
        for _ in range(200):
            x = np.empty(200)
            x[0] = rng.standard_normal()
            for t in range(1, 200):
                x[t] = 0.5 * x[t - 1] + rng.standard_normal()
            rejections += box_pierce(x, 10) < 0.05
        assert rejections / 200 > 0.5

    def test_zero_autocorrelation_gives_p_one(self):
        # every lag-1 product of this zero-mean cycle hits a zero entry,
        # so rho_1 = 0 exactly and the one-lag statistic is zero
        x = np.array([1.0, 0.0, -1.0, 0.0] * 25)
        xc = x - x.mean()
        assert xc[1:] @ xc[:-1] == 0.0
        assert_allclose(box_pierce(x, 1), 1.0, rtol=1e-10)

    def test_lag_domain(self):
        with pytest.raises(DomainError):
            box_pierce(np.random.default_rng(0).standard_normal(20), 20)
        with pytest.raises(DomainError):
            box_pierce(np.ones(50), 5)


class TestRunEmpirical:
    def test_full_report(self, tmp_path):
        src = write_panel(tmp_path, T=60, N=4, seed=7)
        report = run_empirical(src, bootstrap_reps=60, seed=3)
        assert report["T"] == 60 and report["N"] == 4
        assert set(report["tests"]) == {"SUM", "MAX", "CC", "DSUM", "DMAX", "DCC"}
        for entry in report["tests"].values():
            assert 0.0 <= entry["p_value"] <= 1.0
        assert 0.0 <= report["box_pierce"]["share_reject_5pct"] <= 1.0
        assert len(report["box_pierce"]["p_values"]) == 4

    def test_block_length_override_echoed(self, tmp_path):
        src = write_panel(tmp_path, T=60, N=4, seed=8)
        report = run_empirical(src, block_length=18, bootstrap_reps=40, seed=1)
        assert report["block_length"] == 18
        assert report["block_length_source"] == "override"

    def test_subset_of_tests(self, tmp_path):
        src = write_panel(tmp_path, T=60, N=4, seed=9)
        report = run_empirical(src, bootstrap_reps=40, seed=1, tests=("DSUM",))
        assert set(report["tests"]) == {"DSUM"}

    def test_column_order_invariance(self, tmp_path):
        src = write_panel(tmp_path, T=60, N=4, seed=10)
        rets = pd.read_csv(src.returns_csv)
        shuffled = rets[["date", "A2", "A0", "A3", "A1"]]
        spath = tmp_path / "returns_shuffled.csv"
        shuffled.to_csv(spath, index=False)
        a = run_empirical(src, bootstrap_reps=40, seed=5)
        b = run_empirical(
            PanelSource(str(spath), src.factors_csv), bootstrap_reps=40, seed=5
        )
        for name in ("SUM", "MAX", "DSUM", "DMAX"):
            assert_allclose(
                a["tests"][name]["p_value"], b["tests"][name]["p_value"], rtol=1e-9
            )
