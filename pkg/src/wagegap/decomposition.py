"""Three-fold Oaxaca decomposition and Blinder's E/C/U/D summary.

Both decompositions start from per-group mean regressors and coefficients
(:class:`GroupStats`). The high group is the one with the larger mean log
wage; by default the low group's coefficients value the endowment gap::

    W = (Xh - Xl)'bl + Xl'(bh - bl) + (Xh - Xl)'(bh - bl)
      =      E       +      C       +         I
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import ColumnMismatchError, DomainError, EmptyGroupError, ValidationError
from .microdata import INTERCEPT, WEIGHT, encode_design, group_labels
from .regression import fit_wls

REFERENCES = ("low", "high")


@dataclass(frozen=True)
class GroupStats:
    """Mean design row and coefficient vector of one group.

    ``vcov_beta`` and ``vcov_mean`` are optional sampling covariances used
    for delta-method standard errors of the decomposition terms.
    """

    names: tuple[str, ...]
    mean_X: np.ndarray
    beta: np.ndarray
    n: int = 0
    label: str = ""
    vcov_beta: np.ndarray | None = None
    vcov_mean: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "mean_X", np.asarray(self.mean_X, dtype=np.float64))
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=np.float64))
        p = len(self.names)
        if self.mean_X.shape != (p,) or self.beta.shape != (p,):
            raise ValidationError(
                f"group {self.label!r}: {p} names but mean_X has shape {self.mean_X.shape} "
                f"and beta {self.beta.shape}"
            )

    @classmethod
    def from_fit(cls, fit, label: str | None = None) -> GroupStats:
        return cls(
            names=fit.names,
            mean_X=fit.mean_X,
            beta=fit.coefficients,
            n=fit.n_obs,
            label=label if label is not None else (fit.label or ""),
            vcov_beta=fit.vcov,
            vcov_mean=fit.mean_X_vcov,
        )

    def reordered(self, names: Sequence[str]) -> GroupStats:
        idx = [self.names.index(n) for n in names]
        sub = (lambda m: None if m is None else m[np.ix_(idx, idx)])
        return GroupStats(tuple(names), self.mean_X[idx], self.beta[idx], self.n, self.label,
                          sub(self.vcov_beta), sub(self.vcov_mean))


def _align(high: GroupStats, low: GroupStats) -> tuple[GroupStats, GroupStats]:
    if set(high.names) != set(low.names):
        diff = sorted(set(high.names) ^ set(low.names))
        raise ColumnMismatchError(f"design columns differ between groups: {', '.join(diff)}")
    if len(set(high.names)) != len(high.names):
        raise ValidationError("duplicate design column names")
    if INTERCEPT not in high.names:
        raise ValidationError(f"decomposition needs an intercept column named {INTERCEPT!r}")
    for g in (high, low):
        k = g.names.index(INTERCEPT)
        if abs(g.mean_X[k] - 1.0) > 1e-12:
            raise ValidationError(f"group {g.label!r}: intercept mean is {g.mean_X[k]}, expected 1")
    if low.names != high.names:
        low = low.reordered(high.names)
    return high, low


def _var_dot(a, Va, b, Vb) -> float:
    """Variance of a'b for independent random vectors a and b."""
    v = 0.0
    if Vb is not None:
        v += float(a @ Vb @ a)
    if Va is not None:
        v += float(b @ Va @ b)
    if Va is not None and Vb is not None:
        v += float(np.trace(Va @ Vb))
    return v


def _sum_cov(*mats):
    if any(m is None for m in mats):
        return None
    return sum(mats)


@dataclass(frozen=True)
class ThreefoldResult:
    W: float
    E: float
    C: float
    I: float
    names: tuple[str, ...] = ()
    endowments: np.ndarray = field(default_factory=lambda: np.empty(0))
    coefficients: np.ndarray = field(default_factory=lambda: np.empty(0))
    interactions: np.ndarray = field(default_factory=lambda: np.empty(0))
    reference: str = "low"
    high: str = ""
    low: str = ""
    se: dict | None = None

    @classmethod
    def from_components(cls, E: float, C: float, I: float, **kw) -> ThreefoldResult:
        return cls(W=E + C + I, E=E, C=C, I=I, **kw)


def threefold(high: GroupStats, low: GroupStats, reference: str = "low") -> ThreefoldResult:
    """Endowment, coefficient and interaction components of ``W``.

    With ``reference="low"`` the endowment gap is valued at the low group's
    coefficients and the coefficient gap at the low group's means. With
    ``"high"`` the viewpoint flips: ``E = dX'bh``, ``C = Xh'db`` and
    ``I = -dX'db``. Per-variable arrays are the elementwise summands.
    """
    if reference not in REFERENCES:
        raise ValidationError(f"reference must be one of {REFERENCES}, got {reference!r}")
    high, low = _align(high, low)
    dX = high.mean_X - low.mean_X
    db = high.beta - low.beta
    if reference == "low":
        e = dX * low.beta
        c = low.mean_X * db
        i = dX * db
    else:
        e = dX * high.beta
        c = high.mean_X * db
        i = -(dX * db)
    W = float(high.mean_X @ high.beta - low.mean_X @ low.beta)

    se = None
    VdX = _sum_cov(high.vcov_mean, low.vcov_mean)
    Vdb = _sum_cov(high.vcov_beta, low.vcov_beta)
    if VdX is not None and Vdb is not None:
        ref = low if reference == "low" else high
        var_E = _var_dot(dX, VdX, ref.beta, ref.vcov_beta)
        var_C = _var_dot(ref.mean_X, ref.vcov_mean, db, Vdb)
        var_I = _var_dot(dX, VdX, db, Vdb)
        var_W = (_var_dot(high.mean_X, high.vcov_mean, high.beta, high.vcov_beta)
                 + _var_dot(low.mean_X, low.vcov_mean, low.beta, low.vcov_beta))
        se = {k: math.sqrt(max(v, 0.0)) for k, v in
              (("W", var_W), ("E", var_E), ("C", var_C), ("I", var_I))}

    return ThreefoldResult(
        W=W,
        E=float(np.sum(e)),
        C=float(np.sum(c)),
        I=float(np.sum(i)),
        names=high.names,
        endowments=e,
        coefficients=c,
        interactions=i,
        reference=reference,
        high=high.label,
        low=low.label,
        se=se,
    )


def percent_shares(E: float, C: float, I: float) -> dict[str, float]:
    """Components as percentages of ``W = E + C + I``."""
    W = E + C + I
    if W == 0:
        raise DomainError("shares undefined: gross differential W is zero")
    return {"E": 100.0 * E / W, "C": 100.0 * C / W, "I": 100.0 * I / W, "W": 100.0}


def percent_report(r: ThreefoldResult, strict: bool = True) -> dict[str, float | None]:
    """E, C and I as percentages of ``r.W``.

    At ``W == 0`` raises, or with ``strict=False`` returns ``None`` shares.
    """
    if r.W == 0:
        if strict:
            raise DomainError("shares undefined: gross differential W is zero")
        return {"E": None, "C": None, "I": None, "W": None}
    return {"E": 100.0 * r.E / r.W, "C": 100.0 * r.C / r.W, "I": 100.0 * r.I / r.W, "W": 100.0}


def detailed_table(r: ThreefoldResult, strict: bool = True) -> list[dict]:
    """One row per design column plus a ``Subtotal`` row.

    Percent columns are shares of ``W``; ``total_pct`` is the row's
    ``e + c + i`` over ``W``. At ``W == 0`` the percent columns are
    ``None`` when ``strict`` is off.
    """
    if r.W == 0 and strict:
        raise DomainError("shares undefined: gross differential W is zero")
    rows = []
    scale = 100.0 / r.W if r.W != 0 else None
    def pct(v):
        return None if scale is None else float(v) * scale

    items = list(zip(r.names, r.endowments, r.coefficients, r.interactions))
    items.append(("Subtotal", r.E, r.C, r.I))
    for name, e, c, i in items:
        rows.append({
            "variable": name,
            "endowment": float(e),
            "endowment_pct": pct(e),
            "coefficient": float(c),
            "coefficient_pct": pct(c),
            "interaction": float(i),
            "interaction_pct": pct(i),
            "total_pct": pct(e + c + i),
        })
    return rows


@dataclass(frozen=True)
class BlinderResult:
    """Blinder's summary: R = E + C + U and D = C + U.

    ``total`` is the gross gap ``Xh'bh - Xl'bl`` computed directly from
    the group predictions; ``R`` is the sum of the parts.
    """

    E: float
    C: float
    U: float
    total: float | None = None
    high: str = ""
    low: str = ""

    @classmethod
    def from_components(cls, E: float, C: float, U: float, total: float | None = None) -> BlinderResult:
        return cls(E=E, C=C, U=U, total=total)

    @property
    def R(self) -> float:
        return self.E + self.C + self.U

    @property
    def D(self) -> float:
        return self.C + self.U

    @property
    def ratios_defined(self) -> bool:
        return self.R != 0

    @property
    def endowment_ratio(self) -> float:
        """E/R in percent."""
        if self.R == 0:
            raise DomainError("E/R undefined: raw differential R is zero")
        return 100.0 * self.E / self.R

    @property
    def discrimination_ratio(self) -> float:
        """D/R in percent."""
        if self.R == 0:
            raise DomainError("D/R undefined: raw differential R is zero")
        return 100.0 * self.D / self.R


def blinder_original(high: GroupStats, low: GroupStats) -> BlinderResult:
    """E valued at the high group's coefficients; intercept gap isolated as U."""
    high, low = _align(high, low)
    k = high.names.index(INTERCEPT)
    dX = high.mean_X - low.mean_X
    db = high.beta - low.beta
    mask = np.ones(len(high.names), dtype=bool)
    mask[k] = False
    return BlinderResult(
        E=float(np.sum(dX * high.beta)),
        C=float(np.sum(low.mean_X[mask] * db[mask])),
        U=float(db[k]),
        total=float(high.mean_X @ high.beta - low.mean_X @ low.beta),
        high=high.label,
        low=low.label,
    )


@dataclass(frozen=True)
class DataDecomposition:
    threefold: ThreefoldResult
    blinder: BlinderResult
    fits: dict
    high: str
    low: str
    mean_gap: float
    bases: dict = field(default_factory=dict)


def order_groups(table, grouping, groups: Sequence[str], use_weights: bool = True,
                 response: str = "log_daily_wage") -> tuple[str, str]:
    """Pick (high, low) from two groups by weighted mean of ``response``.

    For the forward/non-forward split the order is fixed to (FC, NFC).
    """
    if grouping == "FC_vs_NFC" and set(groups) == {"FC", "NFC"}:
        return "FC", "NFC"
    keys, _ = group_labels(table, grouping)
    wcol = table.column_for_role(WEIGHT)
    means = []
    for g in groups:
        m = keys == g
        w = table[wcol][m] if use_weights and wcol is not None else np.ones(int(m.sum()))
        y = table[response][m]
        means.append(float(np.sum(w * y) / np.sum(w)) if m.any() else -np.inf)
    if means[1] > means[0]:
        return groups[1], groups[0]
    return groups[0], groups[1]


def decompose_from_data(
    table,
    spec,
    grouping,
    high: str | None = None,
    low: str | None = None,
    reference: str = "low",
    use_weights: bool = True,
    cov_type: str = "classical",
) -> DataDecomposition:
    """Fit each group, then run both decompositions.

    ``high``/``low`` default to the ordering from :func:`order_groups` when
    the grouping has exactly two groups.
    """
    keys, order = group_labels(table, grouping)
    if high is None or low is None:
        if len(order) != 2:
            raise ValidationError(
                f"grouping has {len(order)} groups; name the high and low groups explicitly"
            )
        for g in order:
            if not np.any(keys == g):
                raise EmptyGroupError(f"group {g!r} has no observations", group=g)
        high, low = order_groups(table, grouping, order, use_weights, spec.response)
    for g in (high, low):
        if g not in order:
            raise ValidationError(f"group {g!r} not defined by grouping; groups are {list(order)}")
    if high == low:
        raise ValidationError("high and low groups must differ")

    fits = {}
    means = {}
    bases = {}
    for g in (high, low):
        part = table.take(keys == g)
        if part.n_rows == 0:
            raise EmptyGroupError(f"group {g!r} has no observations", group=g)
        design = encode_design(part, spec, use_weights=use_weights)
        bases = dict(design.bases)
        fits[g] = fit_wls(design.X, design.y, design.weights, names=design.names,
                          cov_type=cov_type, label=g)
        means[g] = float(np.sum(design.weights * design.y) / np.sum(design.weights))

    gh = GroupStats.from_fit(fits[high], high)
    gl = GroupStats.from_fit(fits[low], low)
    return DataDecomposition(
        threefold=threefold(gh, gl, reference=reference),
        blinder=blinder_original(gh, gl),
        fits=fits,
        high=high,
        low=low,
        mean_gap=means[high] - means[low],
        bases=bases,
    )
