import numpy as np
import pytest
from scipy import stats

from mvnproj.harness import (CriticalEntry, CriticalTable, MissingEntryError, null_statistics,
                             published_table, upper_quantile)
from mvnproj.linalg import InsufficientDataError
from mvnproj.projtest import (add_one_pvalue, decide, known_parameter_uniforms,
                              mahalanobis_uniforms, mc_pvalue, pair_list, proj_statistic,
                              mean_removed_quadratic_form, statistic_parts,
                              theorem2_values)
from mvnproj.rng import RngStream
from mvnproj.samplers import mvn_sample, parse_design, sample_design

N = 100_000


def normal_data(n, p, seed, cov=None):
    cov = np.eye(p) if cov is None else cov
    return mvn_sample(np.zeros(p), cov, n, RngStream(seed))


class TestProjection:
    def test_estimated_uniforms_close_to_uniform(self):
        J = mahalanobis_uniforms(normal_data(N, 2, 1))
        assert stats.kstest(J, "uniform").statistic < 0.02
        assert np.all((J >= 0) & (J <= 1))

    def test_affine_invariance(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((60, 3))
        for _ in range(20):
            b = rng.standard_normal((3, 3))
            y = x @ b.T + rng.normal(0, 5, 3)
            np.testing.assert_allclose(mahalanobis_uniforms(y), mahalanobis_uniforms(x), atol=1e-8)

    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_known_parameters_exact(self, p):
        rng = np.random.default_rng(p)
        a = rng.standard_normal((p, p))
        cov = a @ a.T + p * np.eye(p)
        mean = rng.normal(size=p)
        x = mvn_sample(mean, cov, N, RngStream(30 + p))
        J = known_parameter_uniforms(x, mean, cov)
        assert stats.kstest(J, "uniform").pvalue > 0.01

    def test_rejects_one_column(self):
        with pytest.raises(ValueError):
            mahalanobis_uniforms(np.ones((10, 1)))

    def test_too_few_rows(self):
        with pytest.raises(InsufficientDataError):
            proj_statistic(np.arange(15.0).reshape(3, 5))


class TestMeanRemovedForm:
    def test_chi2_p_minus_one(self):
        mean = np.array([1.0, -2.0, 0.5])
        cov = np.array([[2.0, 0.3, 0.1], [0.3, 1.0, -0.4], [0.1, -0.4, 1.5]])
        x = mvn_sample(mean, cov, N, RngStream(40))
        w = theorem2_values(x, mean, cov)
        assert stats.kstest(w, "chi2", args=(2,)).pvalue > 0.01

    def test_univariate_zero(self):
        x = np.random.default_rng(0).normal(size=(50, 1))
        w = mean_removed_quadratic_form(x, [0.0], [[2.0]])
        np.testing.assert_allclose(w, 0, atol=1e-12)

    def test_at_mean(self):
        mean = [1.0, 2.0, 3.0]
        w = mean_removed_quadratic_form(np.tile(mean, (7, 1)), mean, np.eye(3))
        np.testing.assert_array_equal(w, 0)


class TestStatistic:
    def test_sum_identity(self):
        rep = proj_statistic(normal_data(80, 3, 5))
        assert rep.statistic == rep.t1_part.statistic + sum(r.statistic for _, r in rep.t2_parts)

    def test_pairs(self):
        rep = proj_statistic(normal_data(40, 3, 6))
        assert [pq for pq, _ in rep.t2_parts] == [(0, 1), (0, 2), (1, 2)]
        assert pair_list(4) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]

    def test_batched_matches_single(self):
        data = np.stack([normal_data(30, 2, s) for s in range(5)])
        totals = statistic_parts(data)["total"]
        for b in range(5):
            assert totals[b] == pytest.approx(proj_statistic(data[b]).statistic, rel=1e-12)

    def test_location_scale_invariant(self):
        x = normal_data(50, 2, 7)
        y = 3.0 * x + 10
        assert proj_statistic(y).statistic == pytest.approx(proj_statistic(x).statistic,
                                                            rel=1e-8)

    def test_null_quantile_near_published(self):
        s = null_statistics(2, 100, 20000, seed=77)
        assert upper_quantile(s, 0.05) == pytest.approx(5.8645, abs=0.6)

    def test_reports(self):
        rep = proj_statistic(normal_data(50, 2, 8))
        decide(rep, published_table(), 0.05)
        kv = dict(line.split("=", 1) for line in rep.to_keyvalue().splitlines())
        assert kv["decision"] in ("reject", "retain")
        assert float(kv["statistic"]) == pytest.approx(rep.statistic, rel=1e-9)
        assert "critical value" in rep.to_text()

    def test_detects_a1(self):
        x = sample_design(parse_design("A1"), 200, RngStream(9))
        rep = proj_statistic(x)
        assert rep.statistic > published_table().get(2, 125, 0.01).critical


class TestDecide:
    def report(self, value, n=25):
        rep = proj_statistic(normal_data(n, 2, 10))
        rep.statistic = value
        return rep

    def test_published_reject(self):
        d = decide(self.report(9.31), published_table(), 0.05)
        assert d.reject and d.critical == 9.3079

    def test_zero_retains(self):
        assert not decide(self.report(0.0), published_table(), 0.01).reject

    def test_boundary_retains(self):
        d = decide(self.report(9.3079), published_table(), 0.05)
        assert not d.reject and d.label == "retain"

    def test_missing_entry(self):
        with pytest.raises(MissingEntryError):
            decide(self.report(1.0, n=27), published_table(), 0.05)

    def test_interpolated(self):
        table = CriticalTable()
        table.add(2, 25, 0.05, CriticalEntry(9.0, 1000, 1, "r"))
        table.add(2, 30, 0.05, CriticalEntry(8.0, 1000, 1, "r"))
        d = decide(self.report(8.6, n=27), table, 0.05, interpolate=True)
        assert d.critical == pytest.approx(9 - np.log(27 / 25) / np.log(30 / 25))
        assert d.reject
        assert "interpolated" in d.provenance


class TestPvalue:
    def test_add_one(self):
        null = np.linspace(0.1, 5, 99)
        assert add_one_pvalue(10.0, null) == 1 / 100
        assert add_one_pvalue(0.0, null) == 1.0

    def test_extreme_data(self):
        x = sample_design(parse_design("A1"), 300, RngStream(11))
        assert mc_pvalue(x, 200, RngStream(3)) == pytest.approx(1 / 201)

    def test_range_and_reps(self):
        x = normal_data(30, 2, 12)
        p = mc_pvalue(x, 100, RngStream(4))
        assert 1 / 101 <= p <= 1
        with pytest.raises(ValueError):
            mc_pvalue(x, 50, RngStream(4))

    def test_worker_path_agrees(self):
        x = normal_data(30, 2, 13)
        assert mc_pvalue(x, 300, RngStream(5)) == mc_pvalue(x, 300, RngStream(5), workers=2)

    def test_uniform_under_null(self):
        pvals = [mc_pvalue(normal_data(50, 2, 5000 + i), 2000, RngStream(6))
                 for i in range(500)]
        assert stats.kstest(pvals, "uniform").pvalue > 0.01
