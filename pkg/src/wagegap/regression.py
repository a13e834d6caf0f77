"""Weighted least squares with classical inference, and the Mincer earnings fit."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import InsufficientDataError, RankDeficiencyError, ValidationError
from .microdata import encode_design, group_labels
from .special import student_t_sf

RANK_TOL = 1e-10


@dataclass(frozen=True)
class FitResult:
    names: tuple[str, ...]
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    vcov: np.ndarray
    r_squared: float
    adj_r_squared: float
    n_obs: int
    df_resid: int
    sigma2: float
    residuals: np.ndarray
    mean_X: np.ndarray
    mean_X_vcov: np.ndarray
    y_mean: float
    cov_type: str = "classical"
    label: str | None = None

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def se(self, name: str) -> float:
        return float(self.std_errors[self.names.index(name)])


def _dependent_columns(R: np.ndarray, col_norms: np.ndarray) -> list[int]:
    diag = np.abs(np.diag(R))
    return [j for j in range(R.shape[1]) if col_norms[j] == 0 or diag[j] <= RANK_TOL * col_norms[j]]


def fit_wls(
    X,
    y,
    weights=None,
    names: Sequence[str] | None = None,
    cov_type: str = "classical",
    label: str | None = None,
) -> FitResult:
    """Weighted least squares via a Householder QR of ``sqrt(w) X``.

    Minimises ``sum w_i (y_i - x_i'b)^2``. The covariance is
    ``sigma^2 (X'WX)^-1`` with ``sigma^2 = RSS / (n - p)``, where ``n``
    counts rows with positive weight; ``cov_type="HC1"`` swaps in the
    heteroskedasticity-robust sandwich. R-squared is measured about the
    weighted mean of ``y``.

    Raises:
        InsufficientDataError: ``n <= p``.
        RankDeficiencyError: a column lies in the span of the columns before
            it (relative tolerance 1e-10 on the QR diagonal); the exception
            names every such column.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2:
        raise ValidationError("design matrix must be two-dimensional")
    n_rows, p = X.shape
    if y.shape[0] != n_rows:
        raise ValidationError(f"design has {n_rows} rows, response has {y.shape[0]}")
    w = np.ones(n_rows) if weights is None else np.asarray(weights, dtype=np.float64).ravel()
    if w.shape[0] != n_rows:
        raise ValidationError(f"{w.shape[0]} weights for {n_rows} rows")
    if np.any(~np.isfinite(w)) or np.any(w < 0):
        raise ValidationError("weights must be finite and non-negative")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValidationError("design and response must be finite")
    names = tuple(names) if names is not None else tuple(f"x{j}" for j in range(p))
    if len(names) != p:
        raise ValidationError(f"{len(names)} names for {p} columns")
    n = int(np.count_nonzero(w > 0))
    where = f" in group {label!r}" if label is not None else ""
    if n <= p:
        raise InsufficientDataError(f"need more observations than parameters{where}: n={n}, p={p}")

    sw = np.sqrt(w)
    Xw = X * sw[:, None]
    yw = y * sw
    Q, R = np.linalg.qr(Xw, mode="reduced")
    dependent = _dependent_columns(R, np.linalg.norm(Xw, axis=0))
    if dependent:
        cols = [names[j] for j in dependent]
        raise RankDeficiencyError(
            f"design is rank deficient{where}; linearly dependent column(s): {', '.join(cols)}",
            columns=cols,
        )
    beta = solve_triangular(R, Q.T @ yw)
    resid = y - X @ beta
    df_resid = n - p
    rss = float(np.sum(w * resid * resid))
    sigma2 = rss / df_resid
    R_inv = solve_triangular(R, np.eye(p))
    bread = R_inv @ R_inv.T
    if cov_type == "classical":
        vcov = sigma2 * bread
    elif cov_type == "HC1":
        meat_rows = Xw * (sw * resid)[:, None]
        vcov = bread @ (meat_rows.T @ meat_rows) @ bread * (n / df_resid)
    else:
        raise ValidationError(f"unknown cov_type {cov_type!r}")
    vcov = 0.5 * (vcov + vcov.T)
    se = np.sqrt(np.diag(vcov))
    with np.errstate(divide="ignore", invalid="ignore"):
        tvals = beta / se
    pvals = np.array([student_t_sf(float(t), df_resid) if np.isfinite(t) else (0.0 if se_j == 0 else np.nan)
                      for t, se_j in zip(tvals, se)])

    wsum = float(np.sum(w))
    y_mean = float(np.sum(w * y) / wsum)
    tss = float(np.sum(w * (y - y_mean) ** 2))
    if tss > 0:
        r2 = 1.0 - rss / tss
    else:
        r2 = 1.0 if rss == 0 else float("nan")
    adj = 1.0 - (1.0 - r2) * (n - 1) / df_resid

    mean_X = (w @ X) / wsum
    centered = (X - mean_X) * w[:, None]
    mean_X_vcov = (centered.T @ centered) / wsum**2 * (n / (n - 1))

    return FitResult(
        names=names,
        coefficients=beta,
        std_errors=se,
        t_values=tvals,
        p_values=pvals,
        vcov=vcov,
        r_squared=r2,
        adj_r_squared=adj,
        n_obs=n,
        df_resid=df_resid,
        sigma2=sigma2,
        residuals=resid,
        mean_X=mean_X,
        mean_X_vcov=mean_X_vcov,
        y_mean=y_mean,
        cov_type=cov_type,
        label=label,
    )


def significance_stars(p: float) -> str:
    if not np.isfinite(p):
        return ""
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.10:
        return "*"
    return ""


def mincer_fit(table, spec, subset: str | None = None, grouping=None, use_weights: bool = True,
               cov_type: str = "classical") -> FitResult:
    """Fit the log daily wage equation on one group (or the whole table).

    ``spec`` is a :class:`~wagegap.microdata.DesignSpec`; with ``subset``
    set, ``grouping`` selects which rows belong to that group.
    """
    if subset is not None:
        if grouping is None:
            raise ValidationError("subset given without a grouping")
        keys, order = group_labels(table, grouping)
        if subset not in order:
            raise ValidationError(f"group {subset!r} not defined by grouping; groups are {list(order)}")
        table = table.take(keys == subset)
    design = encode_design(table, spec, use_weights=use_weights)
    return fit_wls(design.X, design.y, design.weights, names=design.names, cov_type=cov_type, label=subset)
