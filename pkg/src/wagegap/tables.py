"""Report tables built from analysis results."""

from __future__ import annotations

from collections.abc import Mapping

from .decomposition import DataDecomposition, detailed_table, percent_report
from .inequality import DecompositionReport
from .regression import FitResult, significance_stars
from .report import Column, Report, Table


def theil_table(dec: DecompositionReport, title: str = "Wage gap decomposition by group") -> Table:
    """Per-group rows followed by a total row with within/between parts."""
    rows = []
    for g in dec.groups:
        rows.append({
            "group": g.name,
            "n": g.n,
            "employment_share": g.employment_share,
            "mean_wage": g.mean_wage,
            "gini": g.gini,
            "T_k": g.theil,
            "income_share": g.income_share,
        })
    rows.append({
        "group": "Total Inequality",
        "n": sum(g.n for g in dec.groups),
        "gini": dec.total_gini,
        "total_T": dec.total_T,
        "within_T_w": dec.within_T_w,
        "within_share": dec.within_share,
        "between_T_b": dec.between_T_b,
        "between_share": dec.between_share,
    })
    columns = [
        Column("group", "Social Group", "text"),
        Column("employment_share", "Employment Share (%)", "pct"),
        Column("mean_wage", "Mean Wage", "money"),
        Column("gini", "Gini index", "index"),
        Column("T_k", "Theil index", "index", fallback=("total_T",)),
        Column("within_T_w", "Within Group", "index"),
        Column("within_share", "Within %", "pct"),
        Column("between_T_b", "Between Group", "index"),
        Column("between_share", "Between %", "pct"),
    ]
    return Table(title, columns, rows)


def index_table(profiles: Mapping[str, Mapping[str, float]], counts: Mapping[str, int]) -> Table:
    """One row per index, one column per population (``All`` first)."""
    names = list(profiles)
    index_names = list(next(iter(profiles.values())))
    rows = [{"index": "n", **{g: counts[g] for g in names}}]
    for idx in index_names:
        rows.append({"index": idx, **{g: profiles[g][idx] for g in names}})
    columns = [Column("index", "Index", "text")] + [Column(g, g, "index") for g in names]
    return Table("Inequality indices", columns, rows)


def mincer_table(fit: FitResult, group: str) -> Table:
    rows = []
    for j, name in enumerate(fit.names):
        p = float(fit.p_values[j])
        rows.append({
            "variable": name,
            "coeff": float(fit.coefficients[j]),
            "std_err": float(fit.std_errors[j]),
            "t_value": float(fit.t_values[j]),
            "p_value": p,
            "stars": significance_stars(p),
        })
    columns = [
        Column("variable", "", "text"),
        Column("coeff", "coeff", "coef"),
        Column("std_err", "std err", "coef"),
        Column("t_value", "t-value", "t"),
        Column("p_value", "P>|t|", "p"),
        Column("stars", "", "text"),
    ]
    return Table(f"Earnings function OLS: {group}", columns, rows)


def mincer_summary_table(fits: Mapping[str, FitResult]) -> Table:
    rows = [
        {"group": g, "r_squared": f.r_squared, "adj_r_squared": f.adj_r_squared, "n_obs": f.n_obs}
        for g, f in fits.items()
    ]
    columns = [
        Column("group", "Group", "text"),
        Column("r_squared", "R-squared", "index"),
        Column("adj_r_squared", "Adj-R2", "index"),
        Column("n_obs", "Observations", "int"),
    ]
    return Table("Fit summary", columns, rows, notes=["* p<0.10, ** p<0.05, *** p<0.01"])


def mincer_report(fits: Mapping[str, FitResult], bases: Mapping[str, str], meta: dict) -> Report:
    tables = [mincer_table(f, g) for g, f in fits.items()]
    tables.append(mincer_summary_table(fits))
    meta = dict(meta)
    meta["base_levels"] = dict(bases)
    return Report("Mincer earnings function", tables, meta)


def blinder_table(dd: DataDecomposition) -> Table:
    b = dd.blinder
    defined = b.ratios_defined
    rows = [
        {"component": "Total differential", "value": 100.0 * b.total if b.total is not None else None},
        {"component": "- attributable to endowments (E)", "value": 100.0 * b.E},
        {"component": "- attributable to coefficients (C)", "value": 100.0 * b.C},
        {"component": "Shift coefficient (U)", "value": 100.0 * b.U},
        {"component": "Raw differential (R) {E+C+U}", "value": 100.0 * b.R},
        {"component": "Adjusted differential (D) {C+U}", "value": 100.0 * b.D},
        {"component": "Endowments as % total (E/R)", "value": b.endowment_ratio if defined else None},
        {"component": "Discrimination as % total (D/R)", "value": b.discrimination_ratio if defined else None},
    ]
    columns = [
        Column("component", "Components of Decomposition", "text"),
        Column("value", f"{dd.low} vs {dd.high}", "pct"),
    ]
    return Table("Summary of the Blinder-Oaxaca decomposition (as %)", columns, rows,
                 notes=["E is valued at the high group's coefficients; U is the intercept difference."])


def threefold_table(dd: DataDecomposition) -> Table:
    r = dd.threefold
    shares = percent_report(r, strict=False)
    se = r.se or {}
    rows = [
        {"component": "Due to endowment (E)", "value": r.E, "se": se.get("E"), "pct": shares["E"]},
        {"component": "Due to coefficients (C)", "value": r.C, "se": se.get("C"), "pct": shares["C"]},
        {"component": "Due to interaction (I)", "value": r.I, "se": se.get("I"), "pct": shares["I"]},
        {"component": "Gross Wage Differential (W = E+C+I)", "value": r.W, "se": se.get("W"), "pct": shares["W"]},
    ]
    columns = [
        Column("component", "Components of Decomposition", "text"),
        Column("value", f"{dd.low} vs {dd.high}", "num"),
        Column("se", "std err", "num"),
        Column("pct", "%", "pct"),
    ]
    return Table("Three-fold Blinder-Oaxaca decomposition", columns, rows,
                 notes=[f"reference coefficients: {r.reference} group ({r.low if r.reference == 'low' else r.high})"])


def detailed_decomposition_table(dd: DataDecomposition) -> Table:
    rows = detailed_table(dd.threefold, strict=False)
    columns = [
        Column("variable", "", "text"),
        Column("endowment", "Endowments", "coef"),
        Column("endowment_pct", "%", "pct"),
        Column("coefficient", "Coefficients", "coef"),
        Column("coefficient_pct", "%", "pct"),
        Column("interaction", "Interaction", "coef"),
        Column("interaction_pct", "%", "pct"),
        Column("total_pct", "Total Difference", "pct"),
    ]
    notes = []
    if dd.bases:
        notes.append("dummy base levels: " + ", ".join(f"{k}={v}" for k, v in dd.bases.items()))
    return Table(f"Three-fold decomposition by variable ({dd.low} vs {dd.high})", columns, rows, notes)


def oaxaca_report(dd: DataDecomposition, meta: dict) -> Report:
    meta = dict(meta)
    meta.update({
        "high_group": dd.high,
        "low_group": dd.low,
        "reference": dd.threefold.reference,
        "mean_log_wage_gap": dd.mean_gap,
        "n": {g: f.n_obs for g, f in dd.fits.items()},
        "base_levels": dict(dd.bases),
    })
    return Report(
        "Blinder-Oaxaca decomposition",
        [blinder_table(dd), threefold_table(dd), detailed_decomposition_table(dd)],
        meta,
    )
