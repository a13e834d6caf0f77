"""Loading, validation and derivation of analysis-ready survey microdata.

The flow for a weekly-status wage file is::

    load_table -> add_daily_wage -> apply_filters -> add_log_wage -> encode_design

Every step returns a new immutable :class:`MicrodataTable`; rows removed
along the way are counted in ``table.dropped`` under a criterion key.
"""

from __future__ import annotations

import csv
import io
import math
import os
import warnings
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import BinaryIO, Union

import numpy as np

from .errors import EmptyGroupError, ParseError, SchemaError, ValidationError, DomainError

OUTCOME = "outcome_weekly_wage"
FULL_DAYS = "full_days"
HALF_DAYS = "half_days"
AGE = "age"
CATEGORICAL = "categorical"
BINARY = "binary"
GROUP_LABEL = "group_label"
WEIGHT = "weight"
IGNORE = "ignore"
DERIVED = "derived"

ROLES = frozenset(
    {OUTCOME, FULL_DAYS, HALF_DAYS, AGE, CATEGORICAL, BINARY, GROUP_LABEL, WEIGHT, IGNORE}
)
REQUIRED_ROLES = (OUTCOME, FULL_DAYS, HALF_DAYS, AGE)
NUMERIC_ROLES = frozenset({OUTCOME, FULL_DAYS, HALF_DAYS, AGE, BINARY, WEIGHT})
SINGLETON_ROLES = frozenset({OUTCOME, FULL_DAYS, HALF_DAYS, AGE, WEIGHT})

DAILY_WAGE = "daily_wage"
LOG_DAILY_WAGE = "log_daily_wage"
INTERCEPT = "_cons"
AGE_SQUARED = "age_squared"
AGE_SQUARED_COLUMN = "agesq"

MISSING_TOKENS = frozenset({"", "na", "nan", "null", "."})

# Caste labels after code mapping.
NFC_LABELS = ("ST", "SC", "OBC")
FC_LABELS = ("Others",)
BUILTIN_GROUPINGS = {
    "FC_vs_NFC": {"ST": "NFC", "SC": "NFC", "OBC": "NFC", "Others": "FC"},
    "four_caste": {"ST": "ST", "SC": "SC", "OBC": "OBC", "Others": "Others"},
}
BUILTIN_GROUP_ORDER = {
    "FC_vs_NFC": ("NFC", "FC"),
    "four_caste": ("ST", "SC", "OBC", "Others"),
}


@dataclass(frozen=True)
class ColumnSchema:
    """Declared name and role of one input column.

    ``category_map`` maps raw codes (as they appear in the file) to level
    names; several codes may share a level. ``base`` names the omitted
    level when the column is encoded as dummies.
    """

    name: str
    role: str
    category_map: Mapping[str, str] | None = None
    base: str | None = None

    @property
    def levels(self) -> tuple[str, ...]:
        if not self.category_map:
            return ()
        return tuple(dict.fromkeys(self.category_map.values()))


def validate_schema(schema: Sequence[ColumnSchema]) -> None:
    names = [c.name for c in schema]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise SchemaError(f"duplicate column names in schema: {', '.join(dupes)}")
    for col in schema:
        if col.role not in ROLES:
            raise SchemaError(f"column {col.name!r}: unknown role {col.role!r}")
    for role in SINGLETON_ROLES:
        count = sum(c.role == role for c in schema)
        if count > 1:
            raise SchemaError(f"role {role!r} assigned to {count} columns, expected one")
    for role in REQUIRED_ROLES:
        if not any(c.role == role for c in schema):
            raise SchemaError(f"no column declared with role {role!r}")
    for col in schema:
        if col.role == CATEGORICAL:
            if not col.category_map:
                raise SchemaError(f"categorical column {col.name!r} needs a category_map")
            if col.base is None:
                raise SchemaError(f"categorical column {col.name!r} needs a base level")
            if col.base not in col.levels:
                raise SchemaError(
                    f"categorical column {col.name!r}: base level {col.base!r} "
                    f"not among levels {list(col.levels)}"
                )


@dataclass(frozen=True)
class FilterSpec:
    age_min: float = 15
    age_max: float = 60
    require_positive_wage: bool = True

    def __post_init__(self):
        if self.age_min > self.age_max:
            raise ValidationError(
                f"age_min ({self.age_min}) must not exceed age_max ({self.age_max})"
            )


@dataclass(frozen=True)
class MicrodataTable:
    """Immutable column store of unit records.

    Numeric columns are float64 arrays, categorical and label columns hold
    the raw code strings. ``rows`` keeps the 1-based source data-row number
    of each record so later errors can cite the original file row.
    """

    columns: Mapping[str, np.ndarray]
    schema: tuple[ColumnSchema, ...]
    rows: np.ndarray
    provenance: str = ""
    roles: Mapping[str, str] = field(default_factory=dict)
    dropped: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        lengths = {k: len(v) for k, v in self.columns.items()}
        if len(set(lengths.values()) | {len(self.rows)}) > 1:
            raise ValidationError(f"columns have unequal lengths: {lengths}")
        for arr in (*self.columns.values(), self.rows):
            arr.setflags(write=False)
        if not self.roles:
            object.__setattr__(self, "roles", {c.name: c.role for c in self.schema})

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise SchemaError(f"column {name!r} not present in table") from None

    def __contains__(self, name: str) -> bool:
        return name in self.columns

    def column_schema(self, name: str) -> ColumnSchema | None:
        for col in self.schema:
            if col.name == name:
                return col
        return None

    def column_for_role(self, role: str) -> str | None:
        for name, r in self.roles.items():
            if r == role:
                return name
        return None

    def require_role(self, role: str) -> str:
        name = self.column_for_role(role)
        if name is None:
            raise SchemaError(f"table has no column with role {role!r}")
        return name

    def take(self, mask: np.ndarray, reason: str | None = None) -> MicrodataTable:
        """Rows where ``mask`` is true; removed rows are counted under ``reason``."""
        mask = np.asarray(mask, dtype=bool)
        dropped = dict(self.dropped)
        if reason is not None:
            dropped[reason] = dropped.get(reason, 0) + int((~mask).sum())
        return MicrodataTable(
            columns={k: v[mask] for k, v in self.columns.items()},
            schema=self.schema,
            rows=self.rows[mask],
            provenance=self.provenance,
            roles=dict(self.roles),
            dropped=dropped,
        )

    def with_column(self, name: str, values: np.ndarray, role: str = DERIVED) -> MicrodataTable:
        values = np.array(values)
        if len(values) != self.n_rows:
            raise ValidationError(
                f"new column {name!r} has length {len(values)}, table has {self.n_rows} rows"
            )
        columns = dict(self.columns)
        columns[name] = values
        roles = dict(self.roles)
        roles[name] = role
        return MicrodataTable(columns, self.schema, self.rows, self.provenance, roles, dict(self.dropped))


# -- loading -----------------------------------------------------------------

Source = Union[bytes, str, os.PathLike, BinaryIO]


def _read_text(source: Source) -> tuple[str, str]:
    if isinstance(source, bytes):
        return source.decode("utf-8-sig"), "<bytes>"
    if isinstance(source, (str, os.PathLike)):
        path = os.fspath(source)
        with open(path, "rb") as fh:
            return fh.read().decode("utf-8-sig"), path
    data = source.read()
    name = getattr(source, "name", "<stream>")
    if isinstance(data, str):
        return data, str(name)
    return data.decode("utf-8-sig"), str(name)


def detect_delimiter(header_line: str) -> str:
    """Tab if the header line contains one, comma otherwise."""
    return "\t" if "\t" in header_line else ","


def _is_missing(cell: str) -> bool:
    return cell.strip().lower() in MISSING_TOKENS


def load_table(
    source: Source,
    schema: Sequence[ColumnSchema],
    provenance: str | None = None,
) -> MicrodataTable:
    """Parse delimited UTF-8 text into a validated table.

    ``source`` may be raw bytes, a path or a binary stream. Columns not in
    the schema are ignored. Rows with a missing value in any non-ignored
    schema column are dropped and counted as ``missing:<column>`` (first
    missing column in schema order).

    Raises:
        SchemaError: a schema column is absent from the header.
        ParseError: a numeric cell does not parse, or a binary column holds
            something other than 0/1. The message cites the 1-based data row.
    """
    schema = tuple(schema)
    validate_schema(schema)
    text, name = _read_text(source)
    lines = text.splitlines()
    if not lines:
        raise SchemaError("input is empty; expected a header row")
    delimiter = detect_delimiter(lines[0])
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    header = [h.strip() for h in next(reader)]
    missing_cols = [c.name for c in schema if c.name not in header]
    if missing_cols:
        raise SchemaError(f"missing column(s) in header: {', '.join(missing_cols)}")
    index = {c.name: header.index(c.name) for c in schema}

    raw: dict[str, list] = {c.name: [] for c in schema}
    row_ids: list[int] = []
    for row_no, record in enumerate(reader, start=1):
        if not record or all(not cell.strip() for cell in record):
            continue
        if len(record) != len(header):
            raise ParseError(
                f"row {row_no}: expected {len(header)} fields, found {len(record)}",
                row=row_no,
            )
        for col in schema:
            cell = record[index[col.name]].strip()
            if col.role in NUMERIC_ROLES:
                if _is_missing(cell):
                    value = math.nan
                else:
                    try:
                        value = float(cell)
                    except ValueError:
                        raise ParseError(
                            f"row {row_no}, column {col.name!r}: cannot parse {cell!r} as a number",
                            row=row_no,
                            column=col.name,
                        ) from None
                    if col.role == BINARY and value not in (0.0, 1.0):
                        raise ParseError(
                            f"row {row_no}, column {col.name!r}: binary value must be 0 or 1, got {cell!r}",
                            row=row_no,
                            column=col.name,
                        )
                raw[col.name].append(value)
            else:
                raw[col.name].append(None if _is_missing(cell) else cell)
        row_ids.append(row_no)

    columns: dict[str, np.ndarray] = {}
    for col in schema:
        if col.role in NUMERIC_ROLES:
            columns[col.name] = np.array(raw[col.name], dtype=np.float64)
        else:
            columns[col.name] = np.array(raw[col.name], dtype=object)

    table = MicrodataTable(
        columns=columns,
        schema=schema,
        rows=np.array(row_ids, dtype=np.int64),
        provenance=provenance or name,
    )
    for col in schema:
        if col.role == IGNORE:
            continue
        values = table[col.name]
        if col.role in NUMERIC_ROLES:
            present = ~np.isnan(values)
        else:
            present = np.array([v is not None for v in values], dtype=bool)
        if not present.all():
            table = table.take(present, reason=f"missing:{col.name}")
    return table


def write_table(table: MicrodataTable, path_or_buffer, delimiter: str = ",") -> None:
    """Write schema columns (in schema order) as delimited text.

    Floats use ``repr`` so values round-trip exactly through :func:`load_table`.
    """
    names = [c.name for c in table.schema]

    def fmt(v):
        if isinstance(v, (float, np.floating)):
            v = float(v)
            if v.is_integer() and abs(v) < 1e15:
                return str(int(v))
            return repr(v)
        return "" if v is None else str(v)

    def emit(fh):
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow(names)
        cols = [table[n] for n in names]
        for i in range(table.n_rows):
            writer.writerow([fmt(c[i]) for c in cols])

    if isinstance(path_or_buffer, (str, os.PathLike)):
        with open(path_or_buffer, "w", encoding="utf-8", newline="") as fh:
            emit(fh)
    else:
        emit(path_or_buffer)


# -- derivations -------------------------------------------------------------


def derive_daily_wage(weekly_wage, full_days, half_days):
    """Weekly wage divided by worked-day intensity ``full + 0.5 * half``.

    Works elementwise on arrays; scalars in, float out.

    Raises:
        ValidationError: negative wage, day counts outside [0, 7], or
            ``full + 0.5 * half > 7``.
        DomainError: zero worked days (rate undefined).
    """
    scalar = np.ndim(weekly_wage) == 0 and np.ndim(full_days) == 0 and np.ndim(half_days) == 0
    wage = np.asarray(weekly_wage, dtype=np.float64)
    full = np.asarray(full_days, dtype=np.float64)
    half = np.asarray(half_days, dtype=np.float64)
    if np.any(wage < 0):
        raise ValidationError("weekly wage must be non-negative")
    for label, days in (("full_days", full), ("half_days", half)):
        if np.any((days < 0) | (days > 7)):
            raise ValidationError(f"{label} must lie in [0, 7]")
    intensity = full + 0.5 * half
    if np.any(intensity > 7):
        raise ValidationError("full_days + 0.5 * half_days exceeds 7")
    if np.any(intensity == 0):
        raise DomainError("daily wage undefined: zero days worked")
    daily = wage / intensity
    return float(daily) if scalar else daily


def add_daily_wage(table: MicrodataTable) -> MicrodataTable:
    """Append ``daily_wage``. Rows with zero days worked are dropped as ``zero_days``."""
    wage = table[table.require_role(OUTCOME)]
    full = table[table.require_role(FULL_DAYS)]
    half = table[table.require_role(HALF_DAYS)]
    checks = (
        (wage < 0, "weekly wage must be non-negative"),
        ((full < 0) | (full > 7), "full_days must lie in [0, 7]"),
        ((half < 0) | (half > 7), "half_days must lie in [0, 7]"),
        (full + 0.5 * half > 7, "full_days + 0.5 * half_days exceeds 7"),
    )
    for bad, message in checks:
        if bad.any():
            first = int(table.rows[np.argmax(bad)])
            raise ValidationError(f"row {first}: {message} ({int(bad.sum())} row(s) affected)")
    worked = (full + 0.5 * half) > 0
    if not worked.all():
        table = table.take(worked, reason="zero_days")
        wage = table[table.require_role(OUTCOME)]
        full = table[table.require_role(FULL_DAYS)]
        half = table[table.require_role(HALF_DAYS)]
    if table.n_rows == 0:
        return table.with_column(DAILY_WAGE, np.empty(0))
    return table.with_column(DAILY_WAGE, derive_daily_wage(wage, full, half))


def apply_filters(table: MicrodataTable, spec: FilterSpec) -> MicrodataTable:
    """Keep rows with ``age_min <= age <= age_max`` and, optionally, positive daily wage.

    Drops are counted per criterion in the order age floor, age ceiling,
    wage. An empty result only warns.
    """
    age = table[table.require_role(AGE)]
    if DAILY_WAGE not in table:
        raise SchemaError(f"apply_filters needs the derived {DAILY_WAGE!r} column")
    table = table.take(age >= spec.age_min, reason="age_below_min")
    table = table.take(table[table.require_role(AGE)] <= spec.age_max, reason="age_above_max")
    if spec.require_positive_wage:
        table = table.take(table[DAILY_WAGE] > 0, reason="non_positive_wage")
    if table.n_rows == 0:
        warnings.warn("no rows left after filtering", RuntimeWarning, stacklevel=2)
    return table


def log_wage(daily_wage):
    """Natural log of a strictly positive wage (scalar or array)."""
    arr = np.asarray(daily_wage, dtype=np.float64)
    if np.any(~(arr > 0)):
        raise DomainError("log wage undefined for non-positive daily wage")
    out = np.log(arr)
    return float(out) if np.ndim(daily_wage) == 0 else out


def add_log_wage(table: MicrodataTable) -> MicrodataTable:
    values = table[DAILY_WAGE]
    bad = ~(values > 0)
    if bad.any():
        first = int(table.rows[np.argmax(bad)])
        raise DomainError(
            f"row {first}: log wage undefined for non-positive daily wage "
            f"({int(bad.sum())} row(s)); enable require_positive_wage"
        )
    return table.with_column(LOG_DAILY_WAGE, np.log(values))


def prepare(table: MicrodataTable, filters: FilterSpec | None = None) -> MicrodataTable:
    """Daily wage, filters and log wage in one call."""
    filters = filters or FilterSpec()
    table = apply_filters(add_daily_wage(table), filters)
    if filters.require_positive_wage:
        table = add_log_wage(table)
    return table


# -- design matrices ---------------------------------------------------------


@dataclass(frozen=True)
class Predictor:
    """One design term.

    ``kind`` is ``continuous`` (a numeric column used as is), ``categorical``
    (k-1 dummies in declared level order, ``base`` omitted) or
    ``age_squared`` (square of the age-role column).
    """

    name: str
    kind: str = "continuous"
    base: str | None = None


@dataclass(frozen=True)
class DesignSpec:
    predictors: tuple[Predictor, ...]
    response: str = LOG_DAILY_WAGE
    include_intercept: bool = True

    def __post_init__(self):
        names = [p.name for p in self.predictors]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ValidationError(f"duplicate predictors: {', '.join(dupes)}")
        for p in self.predictors:
            if p.kind not in ("continuous", "categorical", "age_squared"):
                raise ValidationError(f"predictor {p.name!r}: unknown kind {p.kind!r}")

    @classmethod
    def from_names(
        cls,
        names: Sequence[str | Mapping],
        schema: Sequence[ColumnSchema],
        response: str = LOG_DAILY_WAGE,
    ) -> DesignSpec:
        """Resolve predictor kinds from column roles.

        ``age_squared`` is the derived square term; categorical columns use
        the schema base unless an entry ``{name: ..., base: ...}`` overrides it.
        """
        by_name = {c.name: c for c in schema}
        out = []
        for entry in names:
            base = None
            if isinstance(entry, Mapping):
                name = entry["name"]
                base = entry.get("base")
            else:
                name = entry
            if name == AGE_SQUARED:
                out.append(Predictor(name, "age_squared"))
                continue
            col = by_name.get(name)
            if col is None:
                raise SchemaError(f"predictor {name!r} is not a schema column")
            if col.role == CATEGORICAL:
                base = base if base is not None else col.base
                if base not in col.levels:
                    raise SchemaError(f"predictor {name!r}: base {base!r} not among levels {list(col.levels)}")
                out.append(Predictor(name, "categorical", base))
            elif col.role in (AGE, BINARY, OUTCOME, FULL_DAYS, HALF_DAYS):
                out.append(Predictor(name, "continuous"))
            else:
                raise SchemaError(f"column {name!r} with role {col.role!r} cannot be a predictor")
        return cls(tuple(out), response=response)


@dataclass(frozen=True)
class Design:
    X: np.ndarray
    y: np.ndarray
    weights: np.ndarray
    names: tuple[str, ...]
    bases: Mapping[str, str] = field(default_factory=dict)


def map_categories(table: MicrodataTable, name: str) -> np.ndarray:
    """Level names for each row of a categorical or label column."""
    col = table.column_schema(name)
    raw = table[name]
    if col is None or not col.category_map:
        return np.array([str(v) for v in raw], dtype=object)
    cmap = col.category_map
    out = np.empty(len(raw), dtype=object)
    for i, code in enumerate(raw):
        level = cmap.get(code)
        if level is None:
            raise ValidationError(
                f"row {int(table.rows[i])}: code {code!r} in column {name!r} is not in its category_map"
            )
        out[i] = level
    return out


def encode_design(table: MicrodataTable, spec: DesignSpec, use_weights: bool = True) -> Design:
    """Build the intercept-first design matrix, response and weights.

    Dummy columns are named ``<column>:<level>``; the age square term is
    ``agesq``. Weights come from the weight-role column when present and
    ``use_weights`` is set, otherwise they are all one.
    """
    n = table.n_rows
    cols: list[np.ndarray] = []
    names: list[str] = []
    bases: dict[str, str] = {}
    if spec.include_intercept:
        cols.append(np.ones(n))
        names.append(INTERCEPT)
    for p in spec.predictors:
        if p.kind == "continuous":
            cols.append(np.asarray(table[p.name], dtype=np.float64))
            names.append(p.name)
        elif p.kind == "age_squared":
            age = np.asarray(table[table.require_role(AGE)], dtype=np.float64)
            cols.append(age * age)
            names.append(AGE_SQUARED_COLUMN)
        else:
            schema_col = table.column_schema(p.name)
            if schema_col is None or not schema_col.category_map:
                raise SchemaError(f"categorical predictor {p.name!r} has no category_map")
            levels = schema_col.levels
            base = p.base if p.base is not None else schema_col.base
            if base not in levels:
                raise SchemaError(f"predictor {p.name!r}: base {base!r} not among levels {list(levels)}")
            bases[p.name] = base
            mapped = map_categories(table, p.name)
            for level in levels:
                if level == base:
                    continue
                cols.append((mapped == level).astype(np.float64))
                names.append(f"{p.name}:{level}")
    X = np.column_stack(cols) if cols else np.empty((n, 0))
    for j, name in enumerate(names):
        if name != INTERCEPT and n > 0 and np.all(X[:, j] == X[0, j]):
            warnings.warn(f"design column {name!r} is constant", RuntimeWarning, stacklevel=2)
    y = np.asarray(table[spec.response], dtype=np.float64)
    weight_col = table.column_for_role(WEIGHT)
    if use_weights and weight_col is not None:
        w = np.asarray(table[weight_col], dtype=np.float64)
    else:
        w = np.ones(n)
    return Design(X=X, y=y, weights=w, names=tuple(names), bases=bases)


# -- grouping ----------------------------------------------------------------


def _resolve_grouping(grouping) -> tuple[Mapping[str, str], tuple[str, ...]]:
    if isinstance(grouping, str):
        if grouping not in BUILTIN_GROUPINGS:
            raise ValidationError(
                f"unknown grouping {grouping!r}; expected one of {sorted(BUILTIN_GROUPINGS)} or a mapping"
            )
        return BUILTIN_GROUPINGS[grouping], BUILTIN_GROUP_ORDER[grouping]
    if isinstance(grouping, Mapping):
        mapping = {str(k): str(v) for k, v in grouping.items()}
        return mapping, tuple(dict.fromkeys(mapping.values()))
    raise ValidationError(f"grouping must be a name or a mapping, got {type(grouping).__name__}")


def group_labels(table: MicrodataTable, grouping) -> tuple[np.ndarray, tuple[str, ...]]:
    """Group key per row plus the ordered group names of ``grouping``."""
    mapping, order = _resolve_grouping(grouping)
    label_col = table.require_role(GROUP_LABEL)
    labels = map_categories(table, label_col)
    keys = np.empty(len(labels), dtype=object)
    for i, label in enumerate(labels):
        key = mapping.get(label)
        if key is None:
            raise ValidationError(f"row {int(table.rows[i])}: group label {label!r} is not mapped by the grouping")
        keys[i] = key
    return keys, order


def partition_by_group(table: MicrodataTable, grouping) -> dict[str, MicrodataTable]:
    """Split rows into the grouping's groups, in declared order.

    Groups with no rows are kept as empty tables so downstream steps can
    report them by name.
    """
    keys, order = group_labels(table, grouping)
    return {g: table.take(keys == g) for g in order}


def require_nonempty(parts: Mapping[str, MicrodataTable]) -> None:
    for name, part in parts.items():
        if part.n_rows == 0:
            raise EmptyGroupError(f"group {name!r} has no observations", group=name)
