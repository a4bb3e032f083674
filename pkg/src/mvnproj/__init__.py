"""Mahalanobis-projection tests for multivariate normality."""

from .baselines import hz_test, mardia_test
from .harness import (CriticalTable, power_study, published_table, tabulate_critical,
                      type1_study)
from .linalg import inv_sqrt_spd, residualize, sample_mean_cov, sym_eig
from .neyman import SelectionRule, t1_statistic
from .projtest import (decide, mahalanobis_uniforms, mc_pvalue, mean_removed_quadratic_form,
                       proj_statistic, theorem2_values)
from .rankdep import midranks, t2_statistic
from .rng import RngStream
from .samplers import Design, mvn_sample, null_bivariate, null_mvn, sample_design
from .special import chi2_cdf, legendre_b, normal_cdf, normal_pdf, normal_quantile

__version__ = "0.1.0"
