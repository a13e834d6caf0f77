"""Command-line front end.

Commands: ``ineq``, ``theil-decomp``, ``mincer``, ``oaxaca``, ``synth``.
Exit codes: 0 success, 1 compute error, 2 validation or config error.
"""

from __future__ import annotations

import argparse
import io
import os
import sys

import numpy as np

from . import tables
from .config import RunConfig, load_config
from .decomposition import decompose_from_data
from .errors import ConfigError, EmptyGroupError, WagegapError
from .inequality import decompose_theil, index_profile
from .microdata import (
    LOG_DAILY_WAGE,
    WEIGHT,
    add_daily_wage,
    add_log_wage,
    apply_filters,
    encode_design,
    group_labels,
    load_table,
    write_table,
)
from .regression import fit_wls
from .report import FORMATS, Report, render
from .synthlab import PopulationSpec, generate_population

COMMANDS = ("ineq", "theil-decomp", "mincer", "oaxaca", "synth")


def _load(cfg: RunConfig, need_log: bool):
    path = cfg.resolve(cfg.input)
    if not os.path.exists(path):
        raise ConfigError(f"input file not found: {path}")
    table = load_table(path, cfg.schema, provenance=cfg.input)
    table = apply_filters(add_daily_wage(table), cfg.filters)
    if need_log and LOG_DAILY_WAGE not in table:
        table = add_log_wage(table)
    return table


def _weights(table, use_weights: bool):
    col = table.column_for_role(WEIGHT)
    return table[col] if use_weights and col is not None else None


def _meta(cfg: RunConfig, table, args) -> dict:
    col = table.column_for_role(WEIGHT)
    return {
        "input": cfg.input,
        "observations": table.n_rows,
        "weights": col if args.weights == "on" and col is not None else "unit",
        "dropped": dict(table.dropped),
    }


def _drop_zeros(table, column: str, enabled: bool):
    if not enabled:
        return table
    return table.take(table[column] > 0, reason="drop_zeros")


def _require(value, what: str):
    if value is None:
        raise ConfigError(f"config needs '{what}' for this command")
    return value


def cmd_ineq(cfg: RunConfig, args) -> Report:
    table = _load(cfg, need_log=False)
    table = _drop_zeros(table, cfg.outcome, args.drop_zeros)
    use_w = args.weights == "on"
    values = table[cfg.outcome]
    weights = _weights(table, use_w)
    profiles = {"All": index_profile(values, weights)}
    counts = {"All": table.n_rows}
    if cfg.grouping is not None:
        keys, order = group_labels(table, cfg.grouping)
        for g in order:
            m = keys == g
            if not m.any():
                raise EmptyGroupError(f"group {g!r} has no observations", group=g)
            profiles[g] = index_profile(values[m], None if weights is None else weights[m])
            counts[g] = int(m.sum())
    return Report(f"Inequality indices of {cfg.outcome}", [tables.index_table(profiles, counts)],
                  _meta(cfg, table, args))


def cmd_theil_decomp(cfg: RunConfig, args) -> Report:
    grouping = _require(cfg.grouping, "grouping")
    table = _load(cfg, need_log=False)
    table = _drop_zeros(table, cfg.outcome, args.drop_zeros)
    keys, order = group_labels(table, grouping)
    dec = decompose_theil(table[cfg.outcome], keys, weights=_weights(table, args.weights == "on"),
                          order=order, with_gini=True)
    t = tables.theil_table(dec)
    t.notes.append("within/between shares are percentages of total Theil; CSV/JSON carry full precision")
    return Report(f"Theil decomposition of {cfg.outcome}", [t], _meta(cfg, table, args))


def cmd_mincer(cfg: RunConfig, args) -> Report:
    grouping = _require(cfg.grouping, "grouping")
    design = _require(cfg.design, "design")
    table = _load(cfg, need_log=True)
    keys, order = group_labels(table, grouping)
    fits = {}
    bases = {}
    for g in order:
        part = table.take(keys == g)
        if part.n_rows == 0:
            raise EmptyGroupError(f"group {g!r} has no observations", group=g)
        d = encode_design(part, design, use_weights=args.weights == "on")
        bases = d.bases
        fits[g] = fit_wls(d.X, d.y, d.weights, names=d.names,
                          cov_type=cfg.oaxaca.get("cov_type", "classical"), label=g)
    return tables.mincer_report(fits, bases, _meta(cfg, table, args))


def cmd_oaxaca(cfg: RunConfig, args) -> Report:
    grouping = _require(cfg.grouping, "grouping")
    design = _require(cfg.design, "design")
    table = _load(cfg, need_log=True)
    opts = cfg.oaxaca
    dd = decompose_from_data(
        table,
        design,
        grouping,
        high=opts.get("high"),
        low=opts.get("low"),
        reference=opts.get("reference", "low"),
        use_weights=args.weights == "on",
        cov_type=opts.get("cov_type", "classical"),
    )
    return tables.oaxaca_report(dd, _meta(cfg, table, args))


def cmd_synth(cfg: RunConfig, args) -> str:
    spec = PopulationSpec.from_dict(_require(cfg.population, "population"))
    if args.seed is not None:
        spec = spec.with_seed(args.seed)
    table = generate_population(spec)
    buf = io.StringIO()
    write_table(table, buf)
    return buf.getvalue()


HANDLERS = {
    "ineq": cmd_ineq,
    "theil-decomp": cmd_theil_decomp,
    "mincer": cmd_mincer,
    "oaxaca": cmd_oaxaca,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wagegap",
        description="Inequality indices, Theil and Blinder-Oaxaca decompositions for wage microdata.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="analysis config (YAML)")
        p.add_argument("--format", choices=FORMATS, default="text")
        p.add_argument("--output", help="write here instead of standard output")
        p.add_argument("--drop-zeros", action="store_true",
                       help="drop non-positive outcome values before computing indices")
        p.add_argument("--weights", choices=("on", "off"), default="on",
                       help="use the weight column when the schema declares one")
        if name == "synth":
            p.add_argument("--seed", type=int, help="override the population seed")
    return parser


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, need_data=args.command != "synth")
        if args.command == "synth":
            text = cmd_synth(cfg, args)
            out = args.output or (cfg.resolve(cfg.output) if cfg.output else None)
        else:
            with np.errstate(all="ignore"):
                report = HANDLERS[args.command](cfg, args)
            text = render(report, args.format)
            out = args.output
        _write(text, out)
    except WagegapError as exc:
        print(f"wagegap {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"wagegap {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
