"""Inequality decomposition and Blinder-Oaxaca wage-gap analysis for survey microdata."""

from .decomposition import (
    BlinderResult,
    GroupStats,
    ThreefoldResult,
    blinder_original,
    decompose_from_data,
    detailed_table,
    percent_report,
    percent_shares,
    threefold,
)
from .errors import (
    ComputeError,
    DomainError,
    ParseError,
    RankDeficiencyError,
    SchemaError,
    ValidationError,
    WagegapError,
)
from .inequality import (
    DecompositionReport,
    atkinson,
    decompose_theil,
    decomposition_shares,
    ge_index,
    gini,
    inequality_profile,
    percentile_ratio,
    theil_index,
)
from .microdata import (
    ColumnSchema,
    DesignSpec,
    FilterSpec,
    MicrodataTable,
    Predictor,
    apply_filters,
    derive_daily_wage,
    encode_design,
    load_table,
    log_wage,
    partition_by_group,
    prepare,
)
from .regression import FitResult, fit_wls, mincer_fit
from .special import student_t_sf

__version__ = "0.1.0"

__all__ = [
    "BlinderResult", "ColumnSchema", "ComputeError", "DecompositionReport", "DesignSpec", "DomainError",
    "FilterSpec", "FitResult", "GroupStats", "MicrodataTable", "ParseError", "Predictor", "RankDeficiencyError",
    "SchemaError", "ThreefoldResult", "ValidationError", "WagegapError", "apply_filters", "atkinson",
    "blinder_original", "decompose_from_data", "decompose_theil", "decomposition_shares", "derive_daily_wage",
    "detailed_table", "encode_design", "fit_wls", "ge_index", "gini", "inequality_profile", "load_table",
    "log_wage", "mincer_fit", "partition_by_group", "percent_report", "percent_shares", "percentile_ratio",
    "prepare", "student_t_sf", "theil_index", "threefold",
]
