"""
Power against non-normal designs
================================

Rejection rates of the projection test, Henze-Zirkler and Mardia on a few
alternatives whose marginals are all standard normal.
"""

from mvnproj import power_study, published_table

results = power_study(["A1", "A2", "A7"], [50, 100], reps=1000,
                      tests=["proj", "hz", "mardia"], table=published_table(), seed=11)

print(f"{'design':8}{'n':>5}{'test':>8}{'rate':>8}{'se':>8}")
for r in results:
    print(f"{r.design:8}{r.n:5d}{r.test:>8}{r.rate:8.3f}{r.se:8.3f}")
