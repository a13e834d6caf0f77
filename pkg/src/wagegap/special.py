"""Student-t tail probabilities from the regularized incomplete beta function."""

from __future__ import annotations

import math

from scipy.special import betainc

from .errors import DomainError


def student_t_sf(t: float, df: float) -> float:
    """Two-sided p-value ``P(|T| >= |t|)`` for Student's t with ``df`` degrees of freedom.

    Uses ``P = I_x(df/2, 1/2)`` with ``x = df/(df+t^2)``. When ``x`` is close
    to 1 the complement ``1 - I_y(1/2, df/2)`` is evaluated at
    ``y = t^2/(df+t^2)``, computed directly so no precision is lost forming
    ``1 - x``.
    """
    if not df > 0:
        raise DomainError(f"degrees of freedom must be positive, got {df}")
    if math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 0.0
    t2 = t * t
    if t2 == 0.0:
        return 1.0
    x = df / (df + t2)
    y = t2 / (df + t2)
    if x < 0.5:
        p = float(betainc(0.5 * df, 0.5, x))
    else:
        p = 1.0 - float(betainc(0.5, 0.5 * df, y))
    return min(max(p, 0.0), 1.0)


def student_t_cdf(t: float, df: float) -> float:
    p = student_t_sf(t, df)
    return 1.0 - 0.5 * p if t >= 0 else 0.5 * p
