"""Mahalanobis-projection test for multivariate normality.

Rows are standardized by the inverse root of the sample covariance, the
squared residual norms are mapped through the chi-square CDF, and the
statistic adds a smooth uniformity statistic for those values to rank
independence statistics for every pair of residual coordinates.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .linalg import inv_sqrt_spd, residualize
from .neyman import DEFAULT_RULE, SelectionRule, SmoothResult, t1_values
from .rankdep import t2_values
from .special import chi2_cdf


def _check_data(data):
    data = np.asarray(data, dtype=float)
    if data.ndim < 2:
        raise ValueError("data must be an (n, p) array")
    if data.shape[-1] < 2:
        raise ValueError(f"need p >= 2 columns, got {data.shape[-1]}")
    if not np.all(np.isfinite(data)):
        raise ValueError("data contain non-finite values")
    return data


def mahalanobis_uniforms(data, df=None, tol=None):
    """``chi2_cdf(|z_i|^2, df)`` for the sample residuals ``z_i``.

    ``df`` defaults to the dimension ``p``.
    """
    data = _check_data(data)
    z = residualize(data, tol)
    return chi2_cdf(np.sum(z * z, axis=-1), df or data.shape[-1])


def known_parameter_uniforms(data, mean, cov, df=None):
    """Same projection with the true mean and covariance in place of estimates."""
    data = np.asarray(data, dtype=float)
    z = (data - np.asarray(mean, dtype=float)) @ inv_sqrt_spd(cov)
    return chi2_cdf(np.sum(z * z, axis=-1), df or data.shape[-1])


def mean_removed_quadratic_form(data, mean, cov):
    """Per-row ``z'z - (sum_j z_j)^2 / p`` with ``z = cov^(-1/2) (x - mean)``.

    Under multivariate normality these are chi-square with ``p - 1``
    degrees of freedom.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    p = data.shape[-1]
    z = (data - np.asarray(mean, dtype=float)) @ inv_sqrt_spd(np.atleast_2d(cov))
    return np.sum(z * z, axis=-1) - np.sum(z, axis=-1) ** 2 / p


# older name of the same function, kept for callers that use it
theorem2_values = mean_removed_quadratic_form


def pair_list(p):
    return list(combinations(range(p), 2))


def statistic_parts(data, rule=DEFAULT_RULE, df=None, tol=None):
    """Batched pieces of the statistic for ``(..., n, p)`` data.

    Returns a dict with ``t1``/``k1``/``L`` (uniformity part) and
    ``t2``/``k2``/``M`` stacked over coordinate pairs along the last axis
    (``M`` along the second to last), plus ``total``.
    """
    data = _check_data(data)
    p = data.shape[-1]
    z = residualize(data, tol)
    J = chi2_cdf(np.sum(z * z, axis=-1), df or p)
    t1, k1, L = t1_values(J, rule)
    t2s, k2s, Ms = [], [], []
    for s, r in pair_list(p):
        t2, k2, M = t2_values(z[..., s], z[..., r], rule)
        t2s.append(t2)
        k2s.append(k2)
        Ms.append(M)
    t2 = np.stack(t2s, axis=-1)
    return {
        "t1": t1, "k1": k1, "L": L,
        "t2": t2, "k2": np.stack(k2s, axis=-1), "M": np.stack(Ms, axis=-2),
        "total": t1 + t2.sum(axis=-1),
    }


def batch_statistic(data, rule=DEFAULT_RULE, df=None):
    """Statistic values for a stack of datasets, shape ``(..., n, p) -> (...)``."""
    return statistic_parts(data, rule, df)["total"]


@dataclass
class TestReport:
    statistic: float
    t1_part: SmoothResult
    t2_parts: list
    n: int
    p: int
    rule: SelectionRule = DEFAULT_RULE
    df: int = None
    decision: str = None
    critical: float = None
    provenance: str = None
    pvalue: float = None
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        out = {
            "n": self.n,
            "p": self.p,
            "statistic": repr(float(self.statistic)),
            "t1": repr(float(self.t1_part.statistic)),
            "k1": self.t1_part.order,
        }
        for (s, r), res in self.t2_parts:
            out[f"t2_{s + 1}{r + 1}"] = repr(float(res.statistic))
            out[f"k2_{s + 1}{r + 1}"] = res.order
        out["rule"] = self.rule.fingerprint
        out["df"] = self.df
        if self.critical is not None:
            out["critical"] = repr(float(self.critical))
            out["provenance"] = self.provenance
        if self.pvalue is not None:
            out["pvalue"] = repr(float(self.pvalue))
        if self.decision is not None:
            out["decision"] = self.decision
        out.update(self.extra)
        return out

    def to_keyvalue(self):
        return "\n".join(f"{k}={v}" for k, v in self.as_dict().items())

    def to_text(self):
        lines = [
            f"Mahalanobis-projection normality test (n={self.n}, p={self.p})",
            f"  statistic          {self.statistic:12.6f}",
            f"  uniformity part    {self.t1_part.statistic:12.6f}   order {self.t1_part.order}",
        ]
        for (s, r), res in self.t2_parts:
            lines.append(
                f"  rank pair ({s + 1},{r + 1})     {res.statistic:12.6f}   order {res.order}"
            )
        lines.append(f"  rule               {self.rule.fingerprint}  (df={self.df})")
        if self.critical is not None:
            lines.append(f"  critical value     {self.critical:12.6f}   [{self.provenance}]")
        if self.pvalue is not None:
            lines.append(f"  Monte Carlo p      {self.pvalue:12.6f}")
        if self.decision is not None:
            lines.append(f"  decision           {self.decision}")
        for k, v in self.extra.items():
            lines.append(f"  {k:<18} {v}")
        return "\n".join(lines)


def proj_statistic(data, rule=DEFAULT_RULE, df=None, tol=None):
    """Compute the projection statistic for one ``(n, p)`` dataset.

    Parameters
    ----------
    data : array_like, shape (n, p)
        Requires ``p >= 2`` and ``n >= p + 1``.
    rule : SelectionRule
    df : int, optional
        Degrees of freedom of the chi-square projection; defaults to ``p``.

    Returns
    -------
    TestReport
    """
    data = _check_data(data)
    if data.ndim != 2:
        raise ValueError("proj_statistic expects a single (n, p) dataset")
    n, p = data.shape
    df = df or p
    parts = statistic_parts(data, rule, df, tol)
    t1 = SmoothResult(float(parts["t1"]), int(parts["k1"]), parts["L"])
    t2_parts = [
        ((s, r), SmoothResult(float(parts["t2"][i]), int(parts["k2"][i]), parts["M"][i]))
        for i, (s, r) in enumerate(pair_list(p))
    ]
    total = t1.statistic + sum(res.statistic for _, res in t2_parts)
    return TestReport(total, t1, t2_parts, n, p, rule, df)


@dataclass
class Decision:
    reject: bool
    critical: float
    provenance: str

    @property
    def label(self):
        return "reject" if self.reject else "retain"


def decide(report, table, alpha, interpolate=False):
    """Compare ``report.statistic`` with the tabulated critical value.

    Rejects only on strict exceedance. The report is annotated in place.
    """
    critical, provenance = table.lookup(report.p, report.n, alpha, interpolate=interpolate)
    result = Decision(report.statistic > critical, critical, provenance)
    report.decision = result.label
    report.critical = critical
    report.provenance = provenance
    return result


def add_one_pvalue(observed, null):
    """``(1 + #{null >= observed}) / (len(null) + 1)``, never zero."""
    null = np.asarray(null)
    return (1.0 + np.count_nonzero(null >= observed)) / (null.size + 1.0)


def mc_pvalue(data, reps, stream, rule=DEFAULT_RULE, df=None, workers=None):
    """Monte Carlo p-value ``(1 + #{null >= observed}) / (reps + 1)``.

    Null datasets are standard ``N_p(0, I)`` of the same size; replication
    ``i`` uses stream index ``i`` under ``stream.master_seed``. The null
    sample is memoized per configuration.
    """
    from .harness import cached_null_statistics, null_statistics

    if reps < 100:
        raise ValueError(f"need at least 100 null replications, got {reps}")
    data = _check_data(data)
    n, p = data.shape
    observed = proj_statistic(data, rule, df).statistic
    if workers is None:
        null = cached_null_statistics(p, n, reps, stream.master_seed, rule, df)
    else:
        null = null_statistics(p, n, reps, stream.master_seed, rule, df, workers=workers)
    return add_one_pvalue(observed, null)
