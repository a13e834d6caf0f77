"""Seeded synthetic populations with known wage-equation coefficients.

Randomness comes from NumPy's PCG64 bit generator. Every (group, column)
pair draws from its own stream, seeded with
``SeedSequence(seed, spawn_key=(group_index, stream_index))``; variables
use their position as stream index, the noise term uses 1000 and the
day counts 1001. Uniform draws are mapped into the open interval (0, 1)
from 53-bit integers and normal noise is produced by the inverse normal
CDF, so the same spec and seed give the same table on any platform.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from ..errors import ConfigError
from ..microdata import (
    AGE,
    AGE_SQUARED,
    AGE_SQUARED_COLUMN,
    BINARY,
    CATEGORICAL,
    FULL_DAYS,
    GROUP_LABEL,
    HALF_DAYS,
    IGNORE,
    INTERCEPT,
    OUTCOME,
    ColumnSchema,
    DesignSpec,
    MicrodataTable,
    Predictor,
)

DISTRIBUTIONS = ("constant", "uniform", "bernoulli", "categorical")
NOISE_STREAM = 1000
DAYS_STREAM = 1001
_TWO53 = float(2**53)

WEEKLY_WAGE_COL = "weekly_wage"
FULL_DAYS_COL = "full_days"
HALF_DAYS_COL = "half_days"
LATENT_COL = "latent_log_wage"


@dataclass(frozen=True)
class VariableSpec:
    """One regressor: its distribution and its coefficient(s).

    ``name == "age"`` makes the column the age-role column; ``bernoulli``
    and 0/1 ``constant`` columns become binary; ``categorical`` columns use
    their first level as the omitted base, and ``beta`` maps the other
    levels to coefficients. ``age_squared`` is the derived square of age
    and carries only a coefficient.
    """

    name: str
    dist: str
    beta: float | Mapping[str, float] = 0.0
    value: float = 0.0
    low: float = 0.0
    high: float = 1.0
    p: float = 0.5
    levels: tuple[str, ...] = ()
    probs: tuple[float, ...] = ()


@dataclass(frozen=True)
class GroupSpec:
    name: str
    n: int
    intercept: float
    variables: tuple[VariableSpec, ...]
    noise_sd: float = 0.0


@dataclass(frozen=True)
class PopulationSpec:
    groups: tuple[GroupSpec, ...]
    seed: int = 0
    group_column: str = "group"
    vary_days: bool = True

    def __post_init__(self):
        validate_population(self)

    @classmethod
    def from_dict(cls, d: Mapping) -> PopulationSpec:
        """Build from the config-document form (see README)."""
        try:
            groups = []
            for g in d["groups"]:
                variables = []
                for vname, v in (g.get("variables") or {}).items():
                    v = dict(v or {})
                    if vname == AGE_SQUARED:
                        variables.append(VariableSpec(AGE_SQUARED, "derived", beta=float(v.get("beta", 0.0))))
                        continue
                    dist = v.get("dist")
                    beta = v.get("beta", 0.0)
                    if isinstance(beta, Mapping):
                        beta = {str(k): float(b) for k, b in beta.items()}
                    else:
                        beta = float(beta)
                    variables.append(VariableSpec(
                        name=str(vname),
                        dist=str(dist),
                        beta=beta,
                        value=float(v.get("value", 0.0)),
                        low=float(v.get("low", 0.0)),
                        high=float(v.get("high", 1.0)),
                        p=float(v.get("p", 0.5)),
                        levels=tuple(str(x) for x in v.get("levels", ())),
                        probs=tuple(float(x) for x in v.get("probs", ())),
                    ))
                groups.append(GroupSpec(
                    name=str(g["name"]),
                    n=int(g["n"]),
                    intercept=float(g.get("intercept", 0.0)),
                    variables=tuple(variables),
                    noise_sd=float(g.get("noise_sd", 0.0)),
                ))
            return cls(
                groups=tuple(groups),
                seed=int(d.get("seed", 0)),
                group_column=str(d.get("group_column", "group")),
                vary_days=bool(d.get("vary_days", True)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid population spec: {exc}") from None

    def with_seed(self, seed: int) -> PopulationSpec:
        return PopulationSpec(self.groups, seed, self.group_column, self.vary_days)


def validate_population(spec: PopulationSpec) -> None:
    if not spec.groups:
        raise ConfigError("population needs at least one group")
    names = [g.name for g in spec.groups]
    if len(set(names)) != len(names):
        raise ConfigError("group names must be unique")
    if not 0 <= spec.seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    reserved = {WEEKLY_WAGE_COL, FULL_DAYS_COL, HALF_DAYS_COL, LATENT_COL, spec.group_column}
    signature = None
    for g in spec.groups:
        if g.n < 1:
            raise ConfigError(f"group {g.name!r}: n must be at least 1")
        if not g.noise_sd >= 0:
            raise ConfigError(f"group {g.name!r}: noise_sd must be non-negative")
        vnames = [v.name for v in g.variables]
        if len(set(vnames)) != len(vnames):
            raise ConfigError(f"group {g.name!r}: duplicate variable names")
        for v in g.variables:
            where = f"group {g.name!r}, variable {v.name!r}"
            if v.name in reserved:
                raise ConfigError(f"{where}: name clashes with a generated column")
            if v.name == AGE_SQUARED:
                if AGE not in vnames:
                    raise ConfigError(f"{where}: age_squared needs an 'age' variable")
                continue
            if v.dist not in DISTRIBUTIONS:
                raise ConfigError(f"{where}: unknown distribution {v.dist!r}")
            if v.dist == "uniform" and not v.low <= v.high:
                raise ConfigError(f"{where}: uniform needs low <= high")
            if v.dist == "bernoulli" and not 0 <= v.p <= 1:
                raise ConfigError(f"{where}: bernoulli p must lie in [0, 1]")
            if v.dist == "categorical":
                if len(v.levels) < 2 or len(v.levels) != len(v.probs):
                    raise ConfigError(f"{where}: categorical needs >= 2 levels with one prob each")
                if len(set(v.levels)) != len(v.levels):
                    raise ConfigError(f"{where}: duplicate levels")
                if any(p < 0 for p in v.probs) or abs(sum(v.probs) - 1.0) > 1e-9:
                    raise ConfigError(f"{where}: categorical probs must be non-negative and sum to 1")
                if not isinstance(v.beta, Mapping):
                    raise ConfigError(f"{where}: categorical beta must map levels to coefficients")
                unknown = set(v.beta) - set(v.levels[1:])
                if unknown:
                    raise ConfigError(f"{where}: beta for unknown or base level(s) {sorted(unknown)}")
            elif isinstance(v.beta, Mapping):
                raise ConfigError(f"{where}: beta must be a number")
            if v.name == AGE and v.dist not in ("uniform", "constant"):
                raise ConfigError(f"{where}: age must be uniform or constant")
            if v.name != AGE and v.dist in ("uniform",):
                raise ConfigError(f"{where}: only 'age' may be uniform; other columns are binary or categorical")
            if v.name != AGE and v.dist == "constant" and v.value not in (0.0, 1.0):
                raise ConfigError(f"{where}: constant non-age columns must be 0 or 1")
        sig = [(v.name, "derived" if v.name == AGE_SQUARED else _kind(v), v.levels) for v in g.variables]
        if signature is None:
            signature = sig
        elif sig != signature:
            raise ConfigError("all groups must declare the same variables, kinds and levels in the same order")


def _kind(v: VariableSpec) -> str:
    if v.dist == "categorical":
        return CATEGORICAL
    if v.name == AGE:
        return AGE
    return BINARY


def _stream(seed: int, group: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(group, stream))))


def _open_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    k = rng.integers(0, 2**53, size=n, dtype=np.int64)
    return (k.astype(np.float64) + 0.5) / _TWO53


def _draw(v: VariableSpec, rng: np.random.Generator, n: int) -> np.ndarray:
    if v.dist == "constant":
        return np.full(n, v.value)
    u = _open_uniform(rng, n)
    if v.dist == "uniform":
        return v.low + (v.high - v.low) * u
    if v.dist == "bernoulli":
        return (u < v.p).astype(np.float64)
    cum = np.cumsum(v.probs)
    idx = np.searchsorted(cum, u, side="right")
    return np.minimum(idx, len(v.levels) - 1)


def _design_names(spec: PopulationSpec) -> list[str]:
    names = [INTERCEPT]
    for v in spec.groups[0].variables:
        if v.name == AGE_SQUARED:
            names.append(AGE_SQUARED_COLUMN)
        elif v.dist == "categorical":
            names.extend(f"{v.name}:{lvl}" for lvl in v.levels[1:])
        else:
            names.append(v.name)
    return names


def true_coefficients(spec: PopulationSpec, group: str) -> dict[str, float]:
    """Injected coefficients of ``group`` keyed by design column name."""
    g = next((g for g in spec.groups if g.name == group), None)
    if g is None:
        raise ConfigError(f"no group {group!r} in population")
    out = {INTERCEPT: g.intercept}
    for v in g.variables:
        if v.name == AGE_SQUARED:
            out[AGE_SQUARED_COLUMN] = float(v.beta)
        elif v.dist == "categorical":
            for lvl in v.levels[1:]:
                out[f"{v.name}:{lvl}"] = float(v.beta.get(lvl, 0.0))
        else:
            out[v.name] = float(v.beta)
    return out


def population_schema(spec: PopulationSpec) -> tuple[ColumnSchema, ...]:
    cols = [
        ColumnSchema(WEEKLY_WAGE_COL, OUTCOME),
        ColumnSchema(FULL_DAYS_COL, FULL_DAYS),
        ColumnSchema(HALF_DAYS_COL, HALF_DAYS),
    ]
    has_age = False
    for v in spec.groups[0].variables:
        if v.name == AGE_SQUARED:
            continue
        kind = _kind(v)
        if kind == CATEGORICAL:
            cols.append(ColumnSchema(v.name, CATEGORICAL, {lvl: lvl for lvl in v.levels}, v.levels[0]))
        else:
            cols.append(ColumnSchema(v.name, kind))
            has_age = has_age or kind == AGE
    if not has_age:
        cols.append(ColumnSchema(AGE, AGE))
    cols.append(ColumnSchema(spec.group_column, GROUP_LABEL))
    cols.append(ColumnSchema(LATENT_COL, IGNORE))
    return tuple(cols)


def population_design(spec: PopulationSpec) -> DesignSpec:
    preds = []
    for v in spec.groups[0].variables:
        if v.name == AGE_SQUARED:
            preds.append(Predictor(AGE_SQUARED, "age_squared"))
        elif v.dist == "categorical":
            preds.append(Predictor(v.name, "categorical", v.levels[0]))
        else:
            preds.append(Predictor(v.name, "continuous"))
    return DesignSpec(tuple(preds))


def generate_population(spec: PopulationSpec) -> MicrodataTable:
    """Draw every group and stack them in declared group order.

    ``latent_log_wage = x'b + e`` with ``e ~ N(0, noise_sd^2)``; the weekly
    wage is ``exp(latent) * (full_days + 0.5 * half_days)`` so deriving the
    daily wage recovers ``exp(latent)``. With ``vary_days`` off every
    record works seven full days.
    """
    schema = population_schema(spec)
    has_age_var = any(v.name == AGE for v in spec.groups[0].variables)
    parts: dict[str, list] = {c.name: [] for c in schema}
    for gi, g in enumerate(spec.groups):
        n = g.n
        latent = np.full(n, g.intercept)
        age = np.full(n, 30.0)
        for si, v in enumerate(g.variables):
            if v.name == AGE_SQUARED:
                continue
            draw = _draw(v, _stream(spec.seed, gi, si), n)
            if v.dist == "categorical":
                for li, lvl in enumerate(v.levels[1:], start=1):
                    latent = latent + v.beta.get(lvl, 0.0) * (draw == li)
                parts[v.name].append(np.array(v.levels, dtype=object)[draw])
            else:
                latent = latent + v.beta * draw
                parts[v.name].append(draw)
                if v.name == AGE:
                    age = draw
        for v in g.variables:
            if v.name == AGE_SQUARED:
                latent = latent + v.beta * age * age
        if g.noise_sd > 0:
            latent = latent + g.noise_sd * ndtri(_open_uniform(_stream(spec.seed, gi, NOISE_STREAM), n))
        if spec.vary_days:
            days = _stream(spec.seed, gi, DAYS_STREAM)
            full = days.integers(1, 8, size=n).astype(np.float64)
            half = np.where(full < 7, days.integers(0, 2, size=n), 0).astype(np.float64)
        else:
            full = np.full(n, 7.0)
            half = np.zeros(n)
        parts[WEEKLY_WAGE_COL].append(np.exp(latent) * (full + 0.5 * half))
        parts[FULL_DAYS_COL].append(full)
        parts[HALF_DAYS_COL].append(half)
        if not has_age_var:
            parts[AGE].append(age)
        parts[spec.group_column].append(np.full(n, g.name, dtype=object))
        parts[LATENT_COL].append(latent)

    columns = {}
    for c in schema:
        if c.role in (CATEGORICAL, GROUP_LABEL):
            columns[c.name] = np.concatenate(parts[c.name]).astype(object)
        else:
            columns[c.name] = np.concatenate(parts[c.name]).astype(np.float64)
    total = sum(g.n for g in spec.groups)
    return MicrodataTable(
        columns=columns,
        schema=schema,
        rows=np.arange(1, total + 1, dtype=np.int64),
        provenance=f"synthlab(seed={spec.seed})",
    )


def identity_grouping(spec: PopulationSpec) -> dict[str, str]:
    return {g.name: g.name for g in spec.groups}
