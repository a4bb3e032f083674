"""
Testing one dataset
===================

Compute the statistic, decide against the published critical values and
compare with a Monte Carlo p-value.
"""

from mvnproj import RngStream, decide, mc_pvalue, proj_statistic, published_table
from mvnproj.samplers import mvn_sample, parse_design, sample_design

table = published_table()

# normal data: expect to retain most of the time
x = mvn_sample([0.0, 0.0], [[1.0, 0.3], [0.3, 1.0]], 100, RngStream(3))
report = proj_statistic(x)
decide(report, table, alpha=0.05)
print(report.to_text())

# normal marginals, non-normal joint law
y = sample_design(parse_design("A1"), 100, RngStream(4))
report = proj_statistic(y)
decide(report, table, alpha=0.05)
print(report.to_text())

# the same question without a table: simulate the null at this n
print("Monte Carlo p:", mc_pvalue(y, 500, RngStream(5)))
print("Monte Carlo p (normal data):", mc_pvalue(x, 500, RngStream(5)))
