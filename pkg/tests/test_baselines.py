import math

import numpy as np
import pytest
from scipy import stats

from mvnproj.baselines import (hz_beta, hz_lognormal_moments, hz_lognormal_pvalue, hz_statistic,
                               hz_test, mardia_moments, mardia_reject, mardia_test)
from mvnproj.harness import simulate, standard_null, upper_quantile
from mvnproj.rng import RngStream
from mvnproj.samplers import parse_design, sample_design

import oracles


def rows(seed, n, p=2):
    return np.random.default_rng(seed).normal(size=(n, p)) ** 3 + 0.1


class TestMardia:
    def test_symmetric_skewness_zero(self):
        x = [[1, 0], [-1, 0], [0, 1], [0, -1]]
        b1p, _ = mardia_moments(x)
        assert abs(b1p) < 1e-15

    @pytest.mark.parametrize("divisor", ["n", "n-1"])
    def test_against_double_loop(self, divisor):
        x = rows(0, 5)
        b1p, b2p = mardia_moments(x, divisor)
        o1, o2 = oracles.mardia(x.tolist(), 5 if divisor == "n" else 4)
        assert b1p == pytest.approx(o1, rel=1e-12)
        assert b2p == pytest.approx(o2, rel=1e-12)

    def test_affine_invariant(self):
        x = rows(1, 40)
        y = x @ np.array([[1.0, 2.0], [-0.5, 3.0]]) + [4, 5]
        for a, b in zip(mardia_moments(x), mardia_moments(y)):
            assert a == pytest.approx(b, rel=1e-8)
        assert mardia_test(x).decision == mardia_test(y).decision

    def test_report(self):
        rep = mardia_test(rows(2, 100))
        assert rep.decision == "reject"
        assert 0 <= rep.skew_pvalue <= 1 and 0 <= rep.kurt_pvalue <= 1
        assert rep.skew_stat == pytest.approx(100 * rep.b1p / 6)

    def test_batched(self):
        data = np.stack([rows(s, 30) for s in range(6)])
        got = mardia_reject(data)
        want = [mardia_test(d).decision == "reject" for d in data]
        assert list(got) == want

    def test_invalid_options(self):
        with pytest.raises(ValueError):
            mardia_test(rows(3, 20), combine="fisher")
        with pytest.raises(ValueError):
            mardia_moments(rows(3, 20), divisor="n+1")

    def test_null_size(self):
        # stated rule: each sub-test at alpha / 2, moments from the divisor-n covariance
        out = simulate(standard_null(2), 100, 20000, 501, ("mardia",),
                       mardia_opts={"combine": "bonferroni", "divisor": "n"})
        assert np.mean(out["mardia"]) == pytest.approx(0.05, abs=0.01)


class TestHenzeZirkler:
    def test_beta(self):
        assert hz_beta(50, 2) == pytest.approx(2**-0.5 * 62.5 ** (1 / 6), rel=1e-15)
        assert hz_beta(50, 2) == pytest.approx(1.4087, abs=1e-4)

    @pytest.mark.parametrize("seed", range(5))
    def test_against_double_sum(self, seed):
        x = rows(seed, 4)
        assert hz_statistic(x) == pytest.approx(oracles.hz(x.tolist()), abs=1e-12)

    def test_oracle_larger(self):
        x = rows(9, 25, 3)
        assert hz_statistic(x) == pytest.approx(oracles.hz(x.tolist()), rel=1e-11)

    def test_affine_invariant_and_nonnegative(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            x = rng.standard_normal((30, 3))
            b = rng.standard_normal((3, 3))
            s = hz_statistic(x)
            assert s >= 0
            assert hz_statistic(x @ b.T - 2) == pytest.approx(s, rel=1e-8, abs=1e-8)

    def test_batched(self):
        data = np.stack([rows(s, 20) for s in range(4)])
        np.testing.assert_allclose(hz_statistic(data), [hz_statistic(d) for d in data],
                                   rtol=1e-12)

    def test_lognormal_moments_match_simulation(self):
        s = simulate(standard_null(2), 50, 4000, 7, ("hz",))["hz"]
        mu, var = hz_lognormal_moments(50, 2)
        assert s.mean() == pytest.approx(mu, rel=0.05)
        assert s.var() == pytest.approx(var, rel=0.25)

    def test_pvalue_modes(self):
        x = sample_design(parse_design("A1"), 100, RngStream(3))
        rep = hz_test(x)
        assert rep.decision == "reject"
        assert rep.pvalue == pytest.approx(float(hz_lognormal_pvalue(rep.statistic, 100, 2)))
        mc = hz_test(x, null_sample=np.zeros(99))
        assert mc.pvalue == 0.01

    @pytest.mark.slow
    def test_mc_calibrated_null_size(self):
        null = simulate(standard_null(2), 100, 20000, 601, ("hz",))["hz"]
        crit = upper_quantile(null, 0.05)
        fresh = simulate(standard_null(2), 100, 20000, 602, ("hz",))["hz"]
        assert np.mean(fresh > crit) == pytest.approx(0.05, abs=0.006)

    def test_lognormal_null_size(self):
        s = simulate(standard_null(2), 50, 4000, 8, ("hz",))["hz"]
        rate = np.mean(hz_lognormal_pvalue(s, 50, 2) < 0.05)
        assert rate == pytest.approx(0.05, abs=4 * math.sqrt(0.05 * 0.95 / 4000) + 0.01)
        assert stats.kstest(hz_lognormal_pvalue(s, 50, 2), "uniform").statistic < 0.05
