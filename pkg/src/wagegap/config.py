"""The analysis config document.

One YAML file declares the input columns, filters, design and grouping so
a single file reproduces an analysis. Grammar (all keys optional unless
marked)::

    input: data.csv               # required except for synth; relative to this file
    columns:                      # required except for synth
      - {name: wage, role: outcome_weekly_wage}
      - {name: edu, role: categorical, base: none,
         categories: {"01": none, "06": primary}}   # quote raw codes
    filters: {age_min: 15, age_max: 60, require_positive_wage: true}
    grouping: FC_vs_NFC           # four_caste | {custom: {label: group, ...}}
    design:
      response: log_daily_wage
      predictors: [age, age_squared, edu, {name: sex, base: female}]
    outcome: daily_wage           # column analysed by ineq / theil-decomp
    oaxaca: {high: FC, low: NFC, reference: low, cov_type: classical}
    population: {...}             # synth only, see wagegap.synthlab
    output: synthetic.csv         # synth only, default output path
"""

from __future__ import annotations

import os
from collections.abc import Mapping
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError
from .microdata import (
    DAILY_WAGE,
    LOG_DAILY_WAGE,
    ColumnSchema,
    DesignSpec,
    FilterSpec,
    validate_schema,
)


@dataclass(frozen=True)
class RunConfig:
    path: str
    input: str | None
    schema: tuple[ColumnSchema, ...]
    filters: FilterSpec
    design: DesignSpec | None
    grouping: str | Mapping[str, str] | None
    outcome: str = DAILY_WAGE
    oaxaca: Mapping = field(default_factory=dict)
    population: Mapping | None = None
    output: str | None = None

    @property
    def base_dir(self) -> str:
        return os.path.dirname(os.path.abspath(self.path))

    def resolve(self, path: str) -> str:
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)


def _schema(entries) -> tuple[ColumnSchema, ...]:
    if not isinstance(entries, list):
        raise ConfigError("'columns' must be a list of column entries")
    out = []
    for i, e in enumerate(entries):
        if not isinstance(e, Mapping) or "name" not in e or "role" not in e:
            raise ConfigError(f"columns[{i}]: needs 'name' and 'role'")
        cats = e.get("categories")
        if cats is not None:
            if not isinstance(cats, Mapping):
                raise ConfigError(f"columns[{i}]: 'categories' must map codes to levels")
            cats = {str(k): str(v) for k, v in cats.items()}
        base = e.get("base")
        out.append(ColumnSchema(str(e["name"]), str(e["role"]), cats, None if base is None else str(base)))
    schema = tuple(out)
    validate_schema(schema)
    return schema


def _grouping(value):
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, Mapping):
        if set(value) == {"custom"}:
            value = value["custom"]
        if not isinstance(value, Mapping) or not value:
            raise ConfigError("custom grouping must be a non-empty label -> group mapping")
        return {str(k): str(v) for k, v in value.items()}
    raise ConfigError("'grouping' must be FC_vs_NFC, four_caste or a mapping")


def parse_config(doc: Mapping, path: str = "<config>", need_data: bool = True) -> RunConfig:
    if not isinstance(doc, Mapping):
        raise ConfigError(f"{path}: config must be a mapping at top level")
    schema: tuple[ColumnSchema, ...] = ()
    if need_data:
        if "input" not in doc:
            raise ConfigError(f"{path}: missing 'input'")
        if "columns" not in doc:
            raise ConfigError(f"{path}: missing 'columns'")
    if "columns" in doc:
        schema = _schema(doc["columns"])
    f = doc.get("filters") or {}
    try:
        filters = FilterSpec(
            age_min=float(f.get("age_min", 15)),
            age_max=float(f.get("age_max", 60)),
            require_positive_wage=bool(f.get("require_positive_wage", True)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: bad filters: {exc}") from None
    design = None
    if "design" in doc and schema:
        d = doc["design"] or {}
        preds = d.get("predictors")
        if not isinstance(preds, list) or not preds:
            raise ConfigError(f"{path}: design.predictors must be a non-empty list")
        if d.get("include_intercept", True) is not True:
            raise ConfigError(f"{path}: design.include_intercept must be true")
        design = DesignSpec.from_names(preds, schema, response=str(d.get("response", LOG_DAILY_WAGE)))
    oaxaca = dict(doc.get("oaxaca") or {})
    return RunConfig(
        path=path,
        input=None if doc.get("input") is None else str(doc["input"]),
        schema=schema,
        filters=filters,
        design=design,
        grouping=_grouping(doc.get("grouping")),
        outcome=str(doc.get("outcome", DAILY_WAGE)),
        oaxaca=oaxaca,
        population=doc.get("population"),
        output=None if doc.get("output") is None else str(doc["output"]),
    )


def load_config(path: str, need_data: bool = True) -> RunConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    return parse_config(doc or {}, path=path, need_data=need_data)
