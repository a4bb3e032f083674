"""Data-driven Neyman smooth statistic for uniformity on [0, 1]."""

import math
from dataclasses import dataclass, replace

import numpy as np

from .special import legendre_basis

PENALTY_MODES = ("schwarz", "switching")


@dataclass(frozen=True)
class SelectionRule:
    """Penalized order selection shared by the uniformity and rank statistics.

    With ``N_k`` the sum of the first ``k`` squared components, the order is
    the smallest maximizer of ``N_k - k * penalty`` over ``1..dmax``. In
    ``schwarz`` mode ``penalty = log n``; in ``switching`` mode it drops to 2
    when some component exceeds ``sqrt(switch_const * log n)`` in absolute
    value.

    ``penalty_mode`` governs the uniformity statistic and ``rank_mode`` the
    rank independence statistic. The defaults (switching for uniformity,
    plain Schwarz for ranks) reproduce the published critical values.
    """

    dmax: int = 10
    penalty_mode: str = "switching"
    switch_const: float = 2.4
    rank_mode: str = "schwarz"

    def __post_init__(self):
        if int(self.dmax) != self.dmax or self.dmax < 1:
            raise ValueError(f"dmax must be a positive integer, got {self.dmax}")
        if self.penalty_mode not in PENALTY_MODES:
            raise ValueError(f"penalty_mode must be one of {PENALTY_MODES}")
        if self.rank_mode not in PENALTY_MODES:
            raise ValueError(f"rank_mode must be one of {PENALTY_MODES}")
        if not self.switch_const > 0:
            raise ValueError("switch_const must be positive")

    @property
    def fingerprint(self):
        return (f"dmax={self.dmax};mode={self.penalty_mode};c={self.switch_const:g}"
                f";rank_mode={self.rank_mode}")

    @classmethod
    def from_fingerprint(cls, text):
        """Parse a fingerprint; without ``rank_mode`` both parts share ``mode``."""
        try:
            fields = dict(part.split("=", 1) for part in text.strip().split(";"))
            mode = fields["mode"]
            return cls(int(fields["dmax"]), mode, float(fields["c"]),
                       fields.get("rank_mode", mode))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"malformed rule fingerprint {text!r}") from exc

    def for_ranks(self):
        """The rule as applied to the rank statistic."""
        return replace(self, penalty_mode=self.rank_mode)


DEFAULT_RULE = SelectionRule()


@dataclass
class SmoothResult:
    statistic: float
    order: int
    components: np.ndarray


def neyman_components(J, dmax):
    """Scaled component sums ``L_j = n^(-1/2) sum_i b_j(J_i)``, j = 1..dmax.

    ``J`` may carry leading batch axes; the last axis indexes observations.
    """
    J = np.asarray(J, dtype=float)
    n = J.shape[-1]
    if n < 1:
        raise ValueError("need at least one observation")
    basis = legendre_basis(J, dmax)
    return np.moveaxis(basis.sum(axis=-1), 0, -1) / math.sqrt(n)


def penalty(L, n, rule):
    log_n = math.log(n) if n > 1 else 0.0
    L = np.asarray(L, dtype=float)
    if rule.penalty_mode == "schwarz":
        return np.full(L.shape[:-1], log_n)
    big = np.max(np.abs(L), axis=-1) > math.sqrt(rule.switch_const * log_n)
    return np.where(big, 2.0, log_n)


def select_order(L, n, rule=DEFAULT_RULE):
    """Selected order (1-based) for component vector(s) ``L`` of length ``rule.dmax``."""
    L = np.asarray(L, dtype=float)
    if L.shape[-1] != rule.dmax:
        raise ValueError(f"expected {rule.dmax} components, got {L.shape[-1]}")
    nk = np.cumsum(L * L, axis=-1)
    k = np.arange(1, rule.dmax + 1)
    crit = nk - k * penalty(L, n, rule)[..., None]
    order = np.argmax(crit, axis=-1) + 1
    return int(order) if order.ndim == 0 else order


def statistic_at_order(L, order):
    """``sum_{j <= order} L_j^2`` with broadcasting over batch axes."""
    L = np.asarray(L, dtype=float)
    nk = np.cumsum(L * L, axis=-1)
    order = np.asarray(order)
    return np.take_along_axis(nk, (order - 1)[..., None], axis=-1)[..., 0]


def t1_values(J, rule=DEFAULT_RULE):
    """Batched uniformity statistic: returns ``(statistic, order, components)``."""
    J = np.asarray(J, dtype=float)
    L = neyman_components(J, rule.dmax)
    order = np.asarray(select_order(L, J.shape[-1], rule))
    return statistic_at_order(L, order), order, L


def t1_statistic(J, rule=DEFAULT_RULE):
    """Data-driven smooth statistic for uniformity of the values ``J``."""
    J = np.asarray(J, dtype=float)
    if J.ndim != 1:
        raise ValueError("J must be a one-dimensional sample")
    stat, order, L = t1_values(J, rule)
    return SmoothResult(float(stat), int(order), L)
