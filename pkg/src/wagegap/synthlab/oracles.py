"""Brute-force reference implementations for tests.

Repository rule: nothing here may call into ``wagegap.inequality``,
``wagegap.regression`` or ``wagegap.decomposition``. These functions are
deliberately literal (plain loops, explicit normal-equation inversion)
so that agreement with the main path means something.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ComputeError, DomainError


def oracle_theil(values) -> float:
    """Theil's T by two plain passes: mean, then the entropy sum."""
    xs = [float(v) for v in values]
    if not xs:
        raise DomainError("empty income vector")
    for v in xs:
        if not v > 0:
            raise DomainError("Theil undefined for non-positive incomes")
    total = 0.0
    for v in xs:
        total += v
    mean = total / len(xs)
    acc = 0.0
    for v in xs:
        r = v / mean
        acc += r * math.log(r)
    return acc / len(xs)


def oracle_theil_groups(values, labels) -> tuple[float, float]:
    """Between and within Theil components from per-group loops."""
    groups: dict = {}
    for v, g in zip(values, labels):
        groups.setdefault(g, []).append(float(v))
    total = sum(sum(vs) for vs in groups.values())
    n = sum(len(vs) for vs in groups.values())
    mean = total / n
    between = 0.0
    within = 0.0
    for vs in groups.values():
        share = sum(vs) / total
        between += share * math.log((sum(vs) / len(vs)) / mean)
        within += share * oracle_theil(vs)
    return between, within


def oracle_gini(values) -> float:
    """Mean absolute difference over all ordered pairs, divided by twice the mean."""
    xs = [float(v) for v in values]
    n = len(xs)
    mean = sum(xs) / n
    acc = 0.0
    for a in xs:
        for b in xs:
            acc += abs(a - b)
    return acc / (2.0 * n * n * mean)


def _design_rows(table, spec) -> tuple[list[str], list[list[float]], list[float]]:
    names = ["_cons"] if spec.include_intercept else []
    for p in spec.predictors:
        if p.kind == "categorical":
            col = table.column_schema(p.name)
            levels = list(dict.fromkeys(col.category_map.values()))
            names.extend(f"{p.name}:{lvl}" for lvl in levels if lvl != p.base)
        elif p.kind == "age_squared":
            names.append("agesq")
        else:
            names.append(p.name)
    age_col = next(c.name for c in table.schema if c.role == "age")
    rows = []
    for i in range(table.n_rows):
        row = [1.0] if spec.include_intercept else []
        for p in spec.predictors:
            if p.kind == "categorical":
                col = table.column_schema(p.name)
                level = col.category_map[table[p.name][i]]
                levels = list(dict.fromkeys(col.category_map.values()))
                row.extend(1.0 if level == lvl else 0.0 for lvl in levels if lvl != p.base)
            elif p.kind == "age_squared":
                a = float(table[age_col][i])
                row.append(a * a)
            else:
                row.append(float(table[p.name][i]))
        rows.append(row)
    y = [float(v) for v in table[spec.response]]
    return names, rows, y


def _normal_equations(rows, y) -> list[float]:
    p = len(rows[0])
    xtx = np.zeros((p, p))
    xty = np.zeros(p)
    for r, yi in zip(rows, y):
        for a in range(p):
            xty[a] += r[a] * yi
            for b in range(p):
                xtx[a, b] += r[a] * r[b]
    if not np.linalg.cond(xtx) < 1e12:
        raise ComputeError("normal matrix is singular")
    return list(np.linalg.inv(xtx) @ xty)


def oracle_decomposition(table, spec, grouping: dict, high: str, low: str) -> dict[str, float]:
    """E, C, I by literal evaluation with the low group as reference.

    ``grouping`` maps group-label values to group keys. Unit weights only.
    Intended for small problems (p <= 4, n <= 1000).
    """
    label_col = next(c.name for c in table.schema if c.role == "group_label")
    stats = {}
    for key in (high, low):
        idx = [i for i in range(table.n_rows) if grouping[table[label_col][i]] == key]
        sub = table.take(np.isin(np.arange(table.n_rows), idx))
        names, rows, y = _design_rows(sub, spec)
        beta = _normal_equations(rows, y)
        means = [sum(r[j] for r in rows) / len(rows) for j in range(len(names))]
        stats[key] = (means, beta)
    (xh, bh), (xl, bl) = stats[high], stats[low]
    E = sum((xh[j] - xl[j]) * bl[j] for j in range(len(bl)))
    C = sum(xl[j] * (bh[j] - bl[j]) for j in range(len(bl)))
    I = sum((xh[j] - xl[j]) * (bh[j] - bl[j]) for j in range(len(bl)))
    return {"E": E, "C": C, "I": I}
