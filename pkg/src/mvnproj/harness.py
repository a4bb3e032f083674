"""Monte Carlo engine: critical-value tabulation, Type I and power studies.

Replication ``i`` of a study cell always draws from ``RngStream(seed, i)``.
Replications are processed in fixed-size blocks that may be farmed out to
worker processes; blocks are merged in index order, so every result is
independent of the worker count. Cells of one study share replication
streams (common random numbers).
"""

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache, partial

import numpy as np

from .baselines import hz_lognormal_pvalue, hz_statistic, mardia_reject
from .neyman import DEFAULT_RULE, SelectionRule
from .projtest import batch_statistic
from .rng import RngStream
from .samplers import Design, null_bivariate, null_mvn, sample_design

log = logging.getLogger(__name__)

BLOCK = 250
TESTS = ("proj", "hz", "mardia")
TABLE_HEADER = ["p", "n", "alpha", "critical", "reps", "seed", "rule"]
STUDY_HEADER = ["design", "n", "test", "rate", "se", "reps", "seed"]


class MissingEntryError(KeyError):
    """No critical value is available for the requested (p, n, alpha)."""


def default_workers():
    return int(os.environ.get("MVNPROJ_WORKERS", "1"))


def derived_seed(seed, label):
    """A master seed for an auxiliary simulation, derived from ``seed`` and ``label``."""
    words = [int(seed) & 0xFFFFFFFF, int(seed) >> 32 & 0xFFFFFFFF]
    words += [ord(ch) for ch in label]
    return int(np.random.SeedSequence(words).generate_state(1, np.uint64)[0])


def _blocks(reps):
    return [(lo, min(lo + BLOCK, reps)) for lo in range(0, reps, BLOCK)]


def run_blocks(func, reps, workers=None):
    """Apply ``func(lo, hi) -> dict of arrays`` over all replication blocks.

    Returns the per-key concatenation in replication order.
    """
    workers = default_workers() if workers is None else int(workers)
    blocks = _blocks(reps)
    if workers <= 1 or len(blocks) == 1:
        parts = [func(lo, hi) for lo, hi in blocks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(func, *zip(*blocks)))
    return {key: np.concatenate([part[key] for part in parts]) for key in parts[0]}


def _simulate_block(design, n, seed, tests, rule, df, alpha, mardia_opts, lo, hi):
    data = np.stack([sample_design(design, n, RngStream(seed, i)) for i in range(lo, hi)])
    out = {}
    if "proj" in tests:
        out["proj"] = batch_statistic(data, rule, df)
    if "hz" in tests:
        out["hz"] = hz_statistic(data)
    if "mardia" in tests:
        out["mardia"] = mardia_reject(data, alpha, **mardia_opts).astype(float)
    return out


def simulate(design, n, reps, seed, tests=("proj",), rule=DEFAULT_RULE, df=None,
             alpha=0.05, mardia_opts=None, workers=None):
    """Raw per-replication outputs for each test on ``reps`` datasets from ``design``.

    ``proj`` and ``hz`` yield statistics; ``mardia`` yields 0/1 rejections.
    """
    func = partial(_simulate_block, design, int(n), int(seed), tuple(tests), rule, df,
                   alpha, mardia_opts or {})
    return run_blocks(func, int(reps), workers)


def standard_null(p):
    return null_mvn(np.zeros(p), np.eye(p))


def null_statistics(p, n, reps, seed, rule=DEFAULT_RULE, df=None, workers=None):
    """Projection statistics for ``reps`` standard normal datasets of size ``(n, p)``."""
    return simulate(standard_null(p), n, reps, seed, ("proj",), rule, df, workers=workers)["proj"]


@lru_cache(maxsize=16)
def _cached_null(p, n, reps, seed, rule, df):
    stats = null_statistics(p, n, reps, seed, rule, df, workers=default_workers())
    stats.setflags(write=False)
    return stats


def cached_null_statistics(p, n, reps, seed, rule=DEFAULT_RULE, df=None):
    """Memoized :func:`null_statistics`; the result is read-only."""
    return _cached_null(int(p), int(n), int(reps), int(seed), rule, df)


def upper_quantile(values, alpha):
    """Order statistic ``ceil((1 - alpha) * m)`` (1-based) of ``values``."""
    values = np.sort(np.asarray(values, dtype=float))
    m = values.size
    k = min(max(math.ceil((1.0 - alpha) * m - 1e-9), 1), m)
    return float(values[k - 1])


def quantile_standard_error(values, alpha):
    """Distribution-free standard error of the upper ``alpha`` quantile.

    Half the spread between the order statistics one binomial standard
    deviation either side of the target rank.
    """
    values = np.sort(np.asarray(values, dtype=float))
    m = values.size
    half = math.sqrt(alpha * (1.0 - alpha) / m)
    lo = upper_quantile(values, min(alpha + half, 1.0))
    hi = upper_quantile(values, max(alpha - half, 0.0))
    return 0.5 * (hi - lo)


@dataclass(frozen=True)
class CriticalEntry:
    critical: float
    reps: int = None
    seed: int = None
    rule: str = ""


class CriticalTable:
    """Critical values keyed by ``(p, n, alpha)`` with provenance."""

    def __init__(self, entries=None):
        self.entries = dict(entries or {})

    @staticmethod
    def _key(p, n, alpha):
        return int(p), int(n), round(float(alpha), 12)

    def add(self, p, n, alpha, entry):
        self.entries[self._key(p, n, alpha)] = entry

    def __contains__(self, key):
        return self._key(*key) in self.entries

    def __len__(self):
        return len(self.entries)

    def get(self, p, n, alpha):
        return self.entries[self._key(p, n, alpha)]

    def lookup(self, p, n, alpha, interpolate=False):
        """Return ``(critical, provenance)``.

        With ``interpolate`` the value is log-linear in ``n`` between the
        nearest tabulated sizes for the same ``(p, alpha)``.
        """
        key = self._key(p, n, alpha)
        if key in self.entries:
            e = self.entries[key]
            return e.critical, self._provenance(e)
        if interpolate:
            sizes = sorted(k[1] for k in self.entries if k[0] == key[0] and k[2] == key[2])
            below = [m for m in sizes if m < n]
            above = [m for m in sizes if m > n]
            if below and above:
                n1, n2 = below[-1], above[0]
                c1 = self.entries[(key[0], n1, key[2])].critical
                c2 = self.entries[(key[0], n2, key[2])].critical
                w = (math.log(n) - math.log(n1)) / (math.log(n2) - math.log(n1))
                return c1 + w * (c2 - c1), f"interpolated in log n between n={n1} and n={n2}"
        raise MissingEntryError(
            f"no critical value for p={p}, n={n}, alpha={alpha}"
            + ("" if interpolate else " (interpolation disabled)")
        )

    @staticmethod
    def _provenance(e):
        if e.seed is None:
            return f"published table; rule {e.rule or 'unspecified'}"
        return f"reps={e.reps}; seed={e.seed}; rule={e.rule}"

    def rows(self):
        for (p, n, alpha), e in sorted(self.entries.items()):
            yield [p, n, f"{alpha:g}", f"{e.critical:.10g}",
                   "" if e.reps is None else e.reps,
                   "" if e.seed is None else e.seed, e.rule]

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TABLE_HEADER)
        writer.writerows(self.rows())
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames != TABLE_HEADER:
            raise ValueError(f"critical table header must be {','.join(TABLE_HEADER)}")
        table = cls()
        for line, row in enumerate(reader, start=2):
            try:
                table.add(int(row["p"]), int(row["n"]), float(row["alpha"]), CriticalEntry(
                    float(row["critical"]),
                    int(row["reps"]) if row["reps"] else None,
                    int(row["seed"]) if row["seed"] else None,
                    row["rule"]))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"critical table line {line}: {exc}") from exc
        return table

    def save(self, path):
        atomic_write(path, self.to_csv())

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_csv(fh.read())

    def monotonicity_issues(self):
        """Soft checks: C increases as alpha falls and decreases as n grows."""
        issues = []
        by_pn, by_pa = {}, {}
        for (p, n, a), e in self.entries.items():
            by_pn.setdefault((p, n), []).append((a, e.critical))
            by_pa.setdefault((p, a), []).append((n, e.critical))
        for (p, n), vals in sorted(by_pn.items()):
            vals.sort(reverse=True)
            for (a1, c1), (a2, c2) in zip(vals, vals[1:]):
                if not c2 > c1:
                    issues.append(f"p={p} n={n}: C({a2:g})={c2:.4f} not above C({a1:g})={c1:.4f}")
        for (p, a), vals in sorted(by_pa.items()):
            vals.sort()
            for (n1, c1), (n2, c2) in zip(vals, vals[1:]):
                if not c2 < c1:
                    issues.append(f"p={p} alpha={a:g}: C(n={n2})={c2:.4f} not below C(n={n1})={c1:.4f}")
        return issues


# Published critical values for p = 2, plus the trivariate value at n = 250.
_PUBLISHED = {
    25: (0.9759, 5.5513, 9.3079, 18.6332), 30: (0.8577, 5.2503, 9.1045, 18.3795),
    35: (0.8017, 4.8672, 8.3672, 16.9611), 45: (0.7256, 4.4877, 7.7548, 16.6368),
    50: (0.7069, 4.2035, 7.1607, 16.2087), 60: (0.6805, 1.5788, 6.7011, 15.2855),
    80: (0.6284, 1.1314, 5.9050, 14.2164), 90: (0.6225, 1.0960, 5.9588, 14.8072),
    100: (0.6192, 1.0682, 5.8645, 13.7717), 125: (0.6014, 0.9961, 5.5347, 13.2184),
}
PUBLISHED_ALPHAS = (0.2, 0.1, 0.05, 0.01)


def published_table():
    """The published critical values (55,000 null replications each)."""
    table = CriticalTable()
    for n, values in _PUBLISHED.items():
        for alpha, c in zip(PUBLISHED_ALPHAS, values):
            table.add(2, n, alpha, CriticalEntry(c, 55000, None, "published"))
    table.add(3, 250, 0.05, CriticalEntry(7.0513, 55000, None, "published"))
    return table


def tabulate_critical(p, n_list, alpha_list, reps, seed, rule=DEFAULT_RULE, df=None,
                      workers=None, return_samples=False):
    """Tabulate upper-quantile critical values of the null statistic.

    For each ``n`` simulate ``reps`` datasets from ``N_p(0, I)`` and take the
    order statistic ``ceil((1 - alpha) * reps)`` for each ``alpha``.
    """
    if reps < 1000:
        raise ValueError(f"tabulation needs at least 1000 replications, got {reps}")
    table = CriticalTable()
    samples = {}
    for n in n_list:
        stats = null_statistics(p, n, reps, seed, rule, df, workers)
        samples[n] = stats
        for alpha in alpha_list:
            table.add(p, n, alpha,
                      CriticalEntry(upper_quantile(stats, alpha), reps, seed, rule.fingerprint))
    for issue in table.monotonicity_issues():
        log.warning("critical table: %s", issue)
    return (table, samples) if return_samples else table


@dataclass(frozen=True)
class StudyResult:
    design: str
    n: int
    test: str
    rate: float
    reps: int
    seed: int

    @property
    def se(self):
        return math.sqrt(self.rate * (1.0 - self.rate) / self.reps)

    def row(self):
        return [self.design, self.n, self.test, f"{self.rate:.6f}", f"{self.se:.6f}",
                self.reps, self.seed]


def studies_to_csv(results):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(STUDY_HEADER)
    writer.writerows(r.row() for r in results)
    return buf.getvalue()


def studies_from_csv(text):
    reader = csv.DictReader(io.StringIO(text))
    return [StudyResult(r["design"], int(r["n"]), r["test"], float(r["rate"]),
                        int(r["reps"]), int(r["seed"])) for r in reader]


def type1_study(rho_list, n_list, reps, table, seed, rule=DEFAULT_RULE, df=None,
                alpha=0.05, interpolate=False, workers=None):
    """Rejection rates of the projection test under bivariate normal nulls."""
    results = []
    for rho in rho_list:
        design = null_bivariate(rho)
        for n in n_list:
            critical, _ = table.lookup(2, n, alpha, interpolate)
            stats = simulate(design, n, reps, seed, ("proj",), rule, df, workers=workers)["proj"]
            results.append(StudyResult(design.name, n, "proj",
                                       float(np.mean(stats > critical)), reps, seed))
    return results


@lru_cache(maxsize=32)
def _hz_null(n, p, reps, seed):
    stats = simulate(standard_null(p), n, reps, derived_seed(seed, "hz-null"), ("hz",))["hz"]
    stats.setflags(write=False)
    return stats


def hz_mc_critical(n, p, reps, seed, alpha=0.05, workers=None):
    """Upper ``alpha`` quantile of simulated null Henze-Zirkler statistics."""
    if workers is None or workers <= 1:
        return upper_quantile(_hz_null(int(n), int(p), int(reps), int(seed)), alpha)
    stats = simulate(standard_null(p), n, reps, derived_seed(seed, "hz-null"), ("hz",),
                     workers=workers)["hz"]
    return upper_quantile(stats, alpha)


def power_study(designs, n_list, reps, tests, table, seed, rule=DEFAULT_RULE, df=None,
                alpha=0.05, interpolate=False, hz_calibration="lognormal", hz_null_reps=None,
                mardia_opts=None, workers=None):
    """Rejection rates of the requested tests on each design and sample size.

    The projection test uses ``table``; Henze-Zirkler uses the lognormal
    approximation or, with ``hz_calibration="mc"``, a simulated critical
    value from ``hz_null_reps`` null datasets; Mardia uses its asymptotic
    sub-tests.
    """
    unknown = set(tests) - set(TESTS)
    if unknown:
        raise ValueError(f"unknown tests {sorted(unknown)}; valid: {', '.join(TESTS)}")
    if hz_calibration not in ("lognormal", "mc"):
        raise ValueError("hz_calibration must be 'lognormal' or 'mc'")
    results = []
    for design in designs:
        if isinstance(design, str):
            design = Design(design.upper())
        p = design.dim
        for n in n_list:
            critical = table.lookup(p, n, alpha, interpolate)[0] if "proj" in tests else None
            out = simulate(design, n, reps, seed, tests, rule, df, alpha, mardia_opts, workers)
            for test in tests:
                if test == "proj":
                    reject = out["proj"] > critical
                elif test == "hz":
                    if hz_calibration == "mc":
                        hz_crit = hz_mc_critical(n, p, hz_null_reps or reps, seed, alpha, workers)
                        reject = out["hz"] > hz_crit
                    else:
                        reject = hz_lognormal_pvalue(out["hz"], n, p) < alpha
                else:
                    reject = out["mardia"] > 0.5
                results.append(StudyResult(design.name, n, test, float(np.mean(reject)),
                                           reps, seed))
    return results


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    tmp = os.path.join(directory, f".{os.path.basename(path)}.{os.getpid()}.tmp")
    try:
        with open(tmp, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)
