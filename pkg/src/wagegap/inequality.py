"""Inequality indices and the additive between/within Theil decomposition.

All indices accept optional non-negative weights and normalise by their
total, so unit weights reproduce the unweighted formulas and doubling every
weight changes nothing. Reductions go through ``numpy.sum``, which uses
pairwise summation on contiguous float arrays.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EmptyGroupError, ValidationError
from .microdata import WEIGHT, group_labels

GE_ALPHAS = (-1.0, 0.0, 1.0, 2.0)
ATKINSON_EPSILONS = (0.5, 1.0, 2.0)


def _income(values, weights=None, *, strict: bool = True) -> tuple[np.ndarray, np.ndarray]:
    x = np.ascontiguousarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        raise DomainError("income vector is empty")
    if weights is None:
        w = np.ones_like(x)
    else:
        w = np.ascontiguousarray(weights, dtype=np.float64).ravel()
        if w.shape != x.shape:
            raise ValidationError(f"{w.size} weights for {x.size} values")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise DomainError("weights must be finite and non-negative")
    if not np.all(np.isfinite(x)):
        raise DomainError("income values must be finite")
    if strict and np.any(x <= 0):
        raise DomainError("index undefined for non-positive incomes")
    if not strict and np.any(x < 0):
        raise DomainError("index undefined for negative incomes")
    if not np.sum(w) > 0:
        raise DomainError("total weight is zero")
    return x, w


def _wmean(a: np.ndarray, w: np.ndarray) -> float:
    return float(np.sum(w * a) / np.sum(w))


def _all_equal(x: np.ndarray, w: np.ndarray) -> bool:
    """Every positively weighted value is the same; every index is exactly 0."""
    live = x[w > 0]
    return bool(np.all(live == live[0]))


def weighted_mean(values, weights=None) -> float:
    x, w = _income(values, weights, strict=False)
    return _wmean(x, w)


def ge_index(values, alpha: float, weights=None) -> float:
    """Generalised entropy index GE(alpha).

    alpha=0 is the mean log deviation, alpha=1 the Theil index and alpha=2
    half the squared coefficient of variation.
    """
    x, w = _income(values, weights)
    if _all_equal(x, w):
        return 0.0
    r = x / _wmean(x, w)
    if alpha == 0:
        value = -_wmean(np.log(r), w)
    elif alpha == 1:
        value = _wmean(r * np.log(r), w)
    else:
        value = (_wmean(r**alpha, w) - 1.0) / (alpha * (alpha - 1.0))
    # Tiny negative values (and -0.0) are rounding noise on equal incomes.
    return float(value) if value > 0 else 0.0


def theil_index(values, weights=None) -> float:
    """Theil's T, identical to ``ge_index(values, 1)``."""
    return ge_index(values, 1.0, weights)


def mean_log_deviation(values, weights=None) -> float:
    return ge_index(values, 0.0, weights)


def gini(values, weights=None) -> float:
    """Weighted Gini coefficient from the Lorenz curve.

    With population shares ``p_i`` and cumulative income shares ``L_i`` over
    values sorted ascending, ``G = 1 - sum p_i (L_{i-1} + L_i)``. Zeros are
    allowed as long as the mean is positive.
    """
    x, w = _income(values, weights, strict=False)
    if not _wmean(x, w) > 0:
        raise DomainError("Gini undefined for zero mean income")
    if _all_equal(x, w):
        return 0.0
    order = np.argsort(x, kind="stable")
    x, w = x[order], w[order]
    p = w / np.sum(w)
    s = w * x
    lorenz = np.cumsum(s) / np.sum(s)
    prev = np.concatenate(([0.0], lorenz[:-1]))
    value = 1.0 - float(np.sum(p * (prev + lorenz)))
    return value if value > 0 else 0.0


def gini_pairwise(values, weights=None) -> float:
    """Gini as weighted mean absolute difference over twice the mean. O(n^2) memory."""
    x, w = _income(values, weights, strict=False)
    mu = _wmean(x, w)
    if not mu > 0:
        raise DomainError("Gini undefined for zero mean income")
    diff = np.abs(x[:, None] - x[None, :])
    total = np.sum(w[:, None] * w[None, :] * diff)
    return float(total / (2.0 * np.sum(w) ** 2 * mu))


def atkinson(values, epsilon: float, weights=None) -> float:
    """Atkinson index A(epsilon) for inequality aversion ``epsilon > 0``."""
    if not epsilon > 0:
        raise ValidationError("Atkinson inequality aversion must be positive")
    x, w = _income(values, weights)
    if _all_equal(x, w):
        return 0.0
    r = x / _wmean(x, w)
    if epsilon == 1:
        ratio = np.exp(_wmean(np.log(r), w))
    else:
        ratio = _wmean(r ** (1.0 - epsilon), w) ** (1.0 / (1.0 - epsilon))
    value = 1.0 - ratio
    return float(value) if value > 0 else 0.0


def weighted_quantile(values, q: float, weights=None) -> float:
    """Weighted nearest-rank quantile.

    The smallest value whose cumulative weight reaches ``q`` percent of the
    total weight (``0 < q <= 100``). A relative slack of 1e-12 absorbs
    rounding in the cumulative sum.
    """
    if not 0 < q <= 100:
        raise ValidationError(f"percentile must lie in (0, 100], got {q}")
    x, w = _income(values, weights, strict=False)
    order = np.argsort(x, kind="stable")
    x, w = x[order], w[order]
    cum = np.cumsum(w)
    total = cum[-1]
    target = q * total / 100.0
    idx = int(np.searchsorted(cum, target * (1.0 - 1e-12), side="left"))
    return float(x[min(idx, len(x) - 1)])


def percentile_ratio(values, hi: float, lo: float, weights=None) -> float:
    """Ratio of the ``hi`` to the ``lo`` weighted nearest-rank percentile."""
    if not 0 < lo < hi < 100:
        raise ValidationError(f"need 0 < lo < hi < 100, got lo={lo}, hi={hi}")
    q_lo = weighted_quantile(values, lo, weights)
    if not q_lo > 0:
        raise DomainError(f"percentile ratio undefined: p{lo:g} is {q_lo}")
    return weighted_quantile(values, hi, weights) / q_lo


# -- decomposition ------------------------------------------------------------


@dataclass(frozen=True)
class GroupInequality:
    name: str
    n: int
    employment_share: float
    mean_wage: float
    theil: float
    income_share: float
    gini: float | None = None


@dataclass(frozen=True)
class DecompositionReport:
    """Theil decomposition by subgroup.

    ``employment_share`` and the within/between shares are percentages;
    ``income_share`` is a fraction. Values are full precision.
    """

    total_T: float
    between_T_b: float
    within_T_w: float
    groups: tuple[GroupInequality, ...]
    within_share: float
    between_share: float
    total_gini: float | None = None
    extra: Mapping[str, float] = field(default_factory=dict)


def decomposition_shares(total: float, within: float, between: float) -> tuple[float, float]:
    """Within and between components as percentages of ``total``.

    Zero total inequality gives (0, 0).
    """
    if total == 0:
        return 0.0, 0.0
    return 100.0 * within / total, 100.0 * between / total


def _group_indices(labels: Sequence, order: Sequence[str] | None) -> dict[str, np.ndarray]:
    labels = np.asarray(labels, dtype=object)
    if order is None:
        order = list(dict.fromkeys(labels.tolist()))
    out = {}
    for g in order:
        idx = np.flatnonzero(labels == g)
        if idx.size == 0:
            raise EmptyGroupError(f"group {g!r} has no observations", group=str(g))
        out[g] = idx
    covered = sum(len(i) for i in out.values())
    if covered != len(labels):
        raise ValidationError("some observations carry a label outside the group order")
    return out


def decompose_theil(
    values,
    labels: Sequence,
    weights=None,
    order: Sequence[str] | None = None,
    with_gini: bool = False,
) -> DecompositionReport:
    """Split Theil's T into between-group and within-group parts.

    ``T_b = sum_k y_k ln(mean_k / mean)`` with income share ``y_k``, and
    ``T_w = sum_k y_k T_k`` where ``T_k`` is group k's own Theil index.
    ``order`` fixes group order (and requires every listed group to be
    non-empty); by default groups appear in order of first occurrence.
    """
    x, w = _income(values, weights)
    if len(labels) != len(x):
        raise ValidationError(f"{len(labels)} labels for {len(x)} values")
    parts = _group_indices(labels, order)
    total_w = float(np.sum(w))
    total_income = float(np.sum(w * x))
    mu = total_income / total_w
    total_T = theil_index(x, w)

    groups = []
    t_b = []
    t_w = []
    for name, idx in parts.items():
        xk, wk = x[idx], w[idx]
        wsum = float(np.sum(wk))
        if not wsum > 0:
            raise EmptyGroupError(f"group {name!r} has zero total weight", group=str(name))
        income_k = float(np.sum(wk * xk))
        mu_k = income_k / wsum
        y_k = income_k / total_income
        T_k = theil_index(xk, wk)
        t_b.append(y_k * np.log(mu_k / mu))
        t_w.append(y_k * T_k)
        groups.append(
            GroupInequality(
                name=str(name),
                n=int(idx.size),
                employment_share=100.0 * wsum / total_w,
                mean_wage=mu_k,
                theil=T_k,
                income_share=y_k,
                gini=gini(xk, wk) if with_gini else None,
            )
        )
    between = float(np.sum(np.array(t_b)))
    within = float(np.sum(np.array(t_w)))
    within_share, between_share = decomposition_shares(total_T, within, between)
    return DecompositionReport(
        total_T=total_T,
        between_T_b=between,
        within_T_w=within,
        groups=tuple(groups),
        within_share=within_share,
        between_share=between_share,
        total_gini=gini(x, w) if with_gini else None,
    )


def index_profile(values, weights=None) -> dict[str, float]:
    """The full index family: GE(-1, 0, 1, 2), Atkinson(0.5, 1, 2), Gini, p90/p10, p75/p25."""
    out: dict[str, float] = {}
    for a in GE_ALPHAS:
        out[f"GE({a:g})"] = ge_index(values, a, weights)
    for e in ATKINSON_EPSILONS:
        out[f"A({e:g})"] = atkinson(values, e, weights)
    out["Gini"] = gini(values, weights)
    out["p90/p10"] = percentile_ratio(values, 90, 10, weights)
    out["p75/p25"] = percentile_ratio(values, 75, 25, weights)
    return out


def inequality_profile(table, grouping, outcome: str = "daily_wage", use_weights: bool = True) -> DecompositionReport:
    """Table-1 style profile of ``outcome`` across the groups of ``grouping``."""
    keys, order = group_labels(table, grouping)
    weight_col = table.column_for_role(WEIGHT)
    weights = table[weight_col] if use_weights and weight_col is not None else None
    return decompose_theil(table[outcome], keys, weights=weights, order=order, with_gini=True)
