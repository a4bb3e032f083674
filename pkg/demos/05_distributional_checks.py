"""
Distribution of the quadratic form
==================================

With known parameters the Mahalanobis quadratic form of a normal vector is
chi-square with p degrees of freedom. Removing the squared mean of the
whitened coordinates leaves a chi-square with p - 1.
"""

import numpy as np
from scipy import stats

from mvnproj import RngStream, mvn_sample
from mvnproj.projtest import known_parameter_uniforms, mean_removed_quadratic_form
from mvnproj.rankdep import t2_statistic
from mvnproj.samplers import parse_design, sample_design

mean = np.array([1.0, 0.0, -2.0])
cov = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.3], [0.0, 0.3, 1.5]])
x = mvn_sample(mean, cov, 100_000, RngStream(21))

J = known_parameter_uniforms(x, mean, cov)
print("uniformity of the projection, KS p:", stats.kstest(J, "uniform").pvalue)

w = mean_removed_quadratic_form(x, mean, cov)
print("chi-square(2) fit after removing the mean term, KS p:",
      stats.kstest(w, "chi2", args=(2,)).pvalue)

# design A1 has a chi-square quadratic form too, yet is not normal: both
# coordinates always share a sign. The uniformity part cannot see this,
# the rank part can.
a1 = sample_design(parse_design("A1"), 100_000, RngStream(22))
print("A1 projection, KS p:",
      stats.kstest(known_parameter_uniforms(a1, [0, 0], np.eye(2)), "uniform").pvalue)
print("A1 rank statistic on 200 rows:", t2_statistic(a1[:200, 0], a1[:200, 1]).statistic)
