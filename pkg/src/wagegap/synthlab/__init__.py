from .oracles import oracle_decomposition, oracle_gini, oracle_theil, oracle_theil_groups
from .population import (
    GroupSpec,
    PopulationSpec,
    VariableSpec,
    generate_population,
    identity_grouping,
    population_design,
    population_schema,
    true_coefficients,
)

__all__ = [
    "GroupSpec",
    "PopulationSpec",
    "VariableSpec",
    "generate_population",
    "identity_grouping",
    "oracle_decomposition",
    "oracle_gini",
    "oracle_theil",
    "oracle_theil_groups",
    "population_design",
    "population_schema",
    "true_coefficients",
]
