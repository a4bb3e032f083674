"""
Tabulating critical values
==========================

Simulate the null distribution of the statistic and read off upper
quantiles. Replication i always uses stream i, so the table does not
depend on how the work is split across processes.
"""

from mvnproj import published_table, tabulate_critical
from mvnproj.harness import quantile_standard_error

# small run; the published values used 55,000 replications
table, samples = tabulate_critical(2, [25, 50], [0.1, 0.05, 0.01], reps=5000, seed=7,
                                   return_samples=True)
print(table.to_csv())

published = published_table()
for n in (25, 50):
    for alpha in (0.1, 0.05, 0.01):
        ours = table.get(2, n, alpha).critical
        se = quantile_standard_error(samples[n], alpha)
        print(f"n={n:3d} alpha={alpha:<5g} ours {ours:8.4f} (se {se:.3f})"
              f"  published {published.get(2, n, alpha).critical:8.4f}")

# the table persists as CSV with its provenance
table.save("/tmp/mvnproj_demo_table.csv")
