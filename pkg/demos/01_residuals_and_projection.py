"""
Residuals and the chi-square projection
=======================================

Whiten a sample with the symmetric inverse square root of its covariance,
then push the squared residual norms through the chi-square CDF.
"""

import numpy as np
from scipy import stats

from mvnproj import RngStream, mahalanobis_uniforms, mvn_sample
from mvnproj.linalg import inv_sqrt_spd, residualize, sample_mean_cov

# a correlated bivariate normal sample
cov = np.array([[1.0, 0.5], [0.5, 1.0]])
x = mvn_sample([2.0, -1.0], cov, 5000, RngStream(1))

# the symmetric root; for correlation 0.5 the entries are about 1.1154 and -0.2989
print(inv_sqrt_spd(cov))

# residuals have zero mean and identity covariance (divisor n)
z = residualize(x)
mean, s = sample_mean_cov(z)
print(np.round(mean, 12), np.round(s, 10), sep="\n")

# projected values are close to uniform under normality
J = mahalanobis_uniforms(x)
print("KS distance to uniform:", stats.kstest(J, "uniform").statistic)

# and the projection ignores any affine change of coordinates
b = np.array([[3.0, 1.0], [-2.0, 0.5]])
print("max change under x -> Bx + c:", np.abs(mahalanobis_uniforms(x @ b.T + 7) - J).max())
