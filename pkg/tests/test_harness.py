import math

import numpy as np
import pytest

from mvnproj.harness import (BLOCK, CriticalEntry, CriticalTable, MissingEntryError, StudyResult,
                             atomic_write, derived_seed, null_statistics, power_study,
                             published_table, quantile_standard_error, simulate, standard_null,
                             studies_from_csv, studies_to_csv, tabulate_critical, type1_study,
                             upper_quantile)
from mvnproj.neyman import SelectionRule
from mvnproj.samplers import parse_design


class TestSimulation:
    def test_deterministic_and_worker_free(self):
        a = null_statistics(2, 30, 2 * BLOCK + 17, seed=5, workers=1)
        b = null_statistics(2, 30, 2 * BLOCK + 17, seed=5, workers=3)
        np.testing.assert_array_equal(a, b)
        assert a.shape == (2 * BLOCK + 17,)

    def test_prefix_stable(self):
        # replication i depends only on (seed, i)
        a = null_statistics(2, 25, 300, seed=6)
        b = null_statistics(2, 25, 600, seed=6)
        np.testing.assert_array_equal(a, b[:300])

    def test_seed_matters(self):
        assert not np.array_equal(null_statistics(2, 25, 300, 1), null_statistics(2, 25, 300, 2))

    def test_multiple_tests(self):
        out = simulate(parse_design("A7"), 40, 260, 3, ("proj", "hz", "mardia"))
        assert set(out) == {"proj", "hz", "mardia"}
        assert set(np.unique(out["mardia"])) <= {0.0, 1.0}

    def test_derived_seed(self):
        assert derived_seed(1, "hz-null") == derived_seed(1, "hz-null")
        assert derived_seed(1, "hz-null") != derived_seed(2, "hz-null")
        assert derived_seed(1, "a") != derived_seed(1, "b")


class TestQuantiles:
    def test_order_statistic(self):
        values = np.arange(1, 101, dtype=float)[::-1]
        assert upper_quantile(values, 0.05) == 95.0
        assert upper_quantile(values, 0.01) == 99.0
        assert upper_quantile(np.arange(1.0, 1001.0), 0.2) == 800.0

    def test_standard_error(self):
        rng = np.random.default_rng(0)
        x = rng.exponential(size=55000)
        se = quantile_standard_error(x, 0.05)
        # asymptotic sd of the sample quantile: sqrt(a (1 - a) / m) / f(q)
        q = -math.log(0.05)
        want = math.sqrt(0.05 * 0.95 / 55000) / math.exp(-q)
        assert se == pytest.approx(want, rel=0.3)


class TestCriticalTable:
    def table(self):
        t = CriticalTable()
        t.add(2, 25, 0.05, CriticalEntry(9.0, 1000, 7, "dmax=10;mode=switching;c=2.4"))
        t.add(2, 50, 0.05, CriticalEntry(7.0, 1000, 7, "dmax=10;mode=switching;c=2.4"))
        t.add(2, 25, 0.01, CriticalEntry(18.0, 1000, 7, "dmax=10;mode=switching;c=2.4"))
        return t

    def test_lookup(self):
        c, prov = self.table().lookup(2, 25, 0.05)
        assert c == 9.0 and "seed=7" in prov

    def test_missing(self):
        with pytest.raises(MissingEntryError):
            self.table().lookup(2, 30, 0.05)
        with pytest.raises(MissingEntryError):
            self.table().lookup(2, 100, 0.05, interpolate=True)

    def test_interpolation_log_linear(self):
        c, _ = self.table().lookup(2, 35, 0.05, interpolate=True)
        w = math.log(35 / 25) / math.log(2)
        assert c == pytest.approx(9.0 - 2.0 * w)

    def test_csv_round_trip(self, tmp_path):
        t = self.table()
        path = tmp_path / "c.csv"
        t.save(path)
        text = path.read_text()
        assert text.splitlines()[0] == "p,n,alpha,critical,reps,seed,rule"
        back = CriticalTable.load(path)
        assert back.to_csv() == text
        assert back.get(2, 25, 0.01) == t.get(2, 25, 0.01)

    def test_bad_header(self):
        with pytest.raises(ValueError):
            CriticalTable.from_csv("a,b\n1,2\n")

    def test_published(self):
        t = published_table()
        assert t.get(2, 25, 0.05).critical == 9.3079
        assert t.get(2, 100, 0.01).critical == 13.7717
        assert t.get(3, 250, 0.05).critical == 7.0513
        assert "published" in t.lookup(2, 50, 0.05)[1]

    def test_monotonicity_flags(self):
        t = self.table()
        assert t.monotonicity_issues() == []
        t.add(2, 50, 0.01, CriticalEntry(5.0, 1000, 7, ""))
        assert len(t.monotonicity_issues()) == 1

    def test_tabulate_bit_identical(self):
        a = tabulate_critical(2, [25], [0.05, 0.01], 1000, seed=3)
        b = tabulate_critical(2, [25], [0.05, 0.01], 1000, seed=3, workers=2)
        assert a.to_csv() == b.to_csv()
        assert len(a) == 2
        assert a.get(2, 25, 0.01).rule == SelectionRule().fingerprint

    def test_tabulate_minimum_reps(self):
        with pytest.raises(ValueError):
            tabulate_critical(2, [25], [0.05], 999, seed=3)

    @pytest.mark.slow
    def test_tabulate_small_n_published(self):
        t, samples = tabulate_critical(2, [25], [0.01], 55000, seed=8, return_samples=True)
        c = t.get(2, 25, 0.01).critical
        tol = max(3 * quantile_standard_error(samples[25], 0.01), 0.1 * 18.6332)
        assert abs(c - 18.6332) <= tol


class TestStudies:
    def test_csv_round_trip(self):
        res = [StudyResult("A1", 50, "proj", 0.5, 1000, 3)]
        text = studies_to_csv(res)
        assert text.splitlines()[0] == "design,n,test,rate,se,reps,seed"
        assert studies_from_csv(text) == res
        assert res[0].se == pytest.approx(math.sqrt(0.25 / 1000))

    def test_type1_small(self):
        res = type1_study([0.0], [25], 500, published_table(), seed=4)
        assert len(res) == 1 and res[0].design == "N2(rho=0)"
        assert 0 <= res[0].rate < 0.2

    def test_power_validation(self):
        with pytest.raises(ValueError):
            power_study(["A1"], [25], 250, ["sw"], published_table(), 1)
        with pytest.raises(MissingEntryError):
            power_study(["A1"], [27], 250, ["proj"], published_table(), 1)

    def test_power_common_random_numbers(self):
        res = power_study(["A1"], [50], 500, ["proj", "mardia"], published_table(), 9)
        again = power_study(["A1"], [50], 500, ["proj", "mardia"], published_table(), 9,
                            workers=2)
        assert res == again
        assert res[0].rate > res[1].rate

    @pytest.mark.slow
    def test_a4_a5_same_power(self):
        res = power_study(["A4", "A5"], [100], 20000, ["proj"], published_table(), 10)
        a, b = res
        assert abs(a.rate - b.rate) <= 2 * math.sqrt(a.se**2 + b.se**2)

    @pytest.mark.slow
    def test_a6_hz_power(self):
        res = power_study(["A6"], [100], 20000, ["hz"], published_table(), 11)
        assert res[0].rate == pytest.approx(0.458, abs=0.04)


def test_atomic_write(tmp_path):
    path = tmp_path / "out.csv"
    atomic_write(path, "a\n")
    atomic_write(path, "b\n")
    assert path.read_text() == "b\n"
    assert [p.name for p in tmp_path.iterdir()] == ["out.csv"]


def test_standard_null():
    d = standard_null(3)
    assert d.dim == 3
