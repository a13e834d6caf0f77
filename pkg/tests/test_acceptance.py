"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import json
import os
import subprocess
import sys
import textwrap
import time
from pathlib import Path

import numpy as np

from wagegap.decomposition import (
    BlinderResult,
    GroupStats,
    ThreefoldResult,
    blinder_original,
    decompose_from_data,
    percent_report,
    threefold,
)
from wagegap.inequality import (
    atkinson,
    decompose_theil,
    decomposition_shares,
    ge_index,
    gini,
    gini_pairwise,
    theil_index,
)
from wagegap.microdata import prepare
from wagegap.regression import fit_wls
from wagegap.special import student_t_sf
from wagegap.synthlab import (
    GroupSpec,
    PopulationSpec,
    VariableSpec,
    generate_population,
    oracle_decomposition,
    oracle_theil,
)
from wagegap.synthlab.population import identity_grouping, population_design

from .test_special import DFS, T_GRID, quad_two_sided

FIXTURES = Path(__file__).parent / "fixtures"


def test_ac1_theil_additivity(criterion):
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 10_001))
        k = int(rng.integers(1, min(8, n) + 1))
        labels = rng.integers(0, k, size=n)
        labels[:k] = np.arange(k)
        values = rng.lognormal(rng.uniform(-1, 5), rng.uniform(0.05, 2.0), size=n)
        rep = decompose_theil(values, labels.astype(str))
        worst = max(worst, abs(rep.total_T - (rep.between_T_b + rep.within_T_w)) / max(1.0, rep.total_T))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 10
    criterion(1, ok, f"Theil additivity: max |T-(Tb+Tw)|/max(1,T) = {worst:.2e} over 1000 datasets, {elapsed:.1f}s")
    assert ok


def _random_stats(rng, p, label):
    names = ["_cons"] + [f"v{j}" for j in range(1, p)]
    mean_X = np.concatenate(([1.0], rng.uniform(-5, 5, size=p - 1)))
    return GroupStats(names, mean_X, rng.normal(0, 1, size=p), label=label)


def test_ac2_oaxaca_identities(criterion):
    rng = np.random.default_rng(202)
    add = swap = 0.0
    blinder_exact = True
    for _ in range(1000):
        p = int(rng.integers(1, 12))
        h, lo = _random_stats(rng, p, "H"), _random_stats(rng, p, "L")
        r, s = threefold(h, lo), threefold(lo, h)
        add = max(add, abs(r.W - (r.E + r.C + r.I)) / max(1.0, abs(r.W)))
        swap = max(swap, abs(s.W + r.W), abs(s.E + (r.E + r.I)), abs(s.C + (r.C + r.I)), abs(s.I - r.I))
        b = blinder_original(h, lo)
        blinder_exact &= b.R == b.E + b.C + b.U and b.D == b.C + b.U
    ok = add <= 1e-12 and swap <= 1e-12 and blinder_exact
    criterion(2, ok, f"Oaxaca identities: additivity {add:.2e}, swap {swap:.2e}, Blinder exact={blinder_exact}")
    assert ok


def test_ac3_blinder_arithmetic(criterion):
    b = BlinderResult.from_components(43.1, 6.1, -0.4)
    got = (b.R, b.D, b.endowment_ratio, b.discrimination_ratio)
    want = (48.8, 5.7, 88.3, 11.7)
    ok = all(abs(g - w) <= 0.05 for g, w in zip(got, want))
    criterion(3, ok, "Blinder summary: R={:.4f} D={:.4f} E/R={:.4f}% D/R={:.4f}%".format(*got))
    assert ok


def test_ac4_threefold_shares(criterion):
    r = ThreefoldResult.from_components(0.3475596, 0.0571873, 0.0830914)
    shares = percent_report(r)
    got = (shares["E"], shares["C"], shares["I"])
    ok = abs(r.W - 0.4878383) <= 1e-12 and all(abs(g - w) <= 0.01 for g, w in zip(got, (71.24, 11.72, 17.03)))
    criterion(4, ok, "Three-fold shares: W={:.7f}, E/C/I = {:.4f}/{:.4f}/{:.4f}%".format(r.W, *got))
    assert ok


def test_ac5_theil_shares(criterion):
    within, between = decomposition_shares(0.5067, 0.4547, 0.0518)
    ok = abs(within - 89.74) <= 0.02 and abs(between - 10.22) <= 0.02
    criterion(5, ok, f"Theil shares: within {within:.4f}%, between {between:.4f}%")
    assert ok


def test_ac6_regression(criterion):
    rng = np.random.default_rng(606)
    coef_err = orth = 0.0
    for _ in range(100):
        p = int(rng.integers(1, 5))
        n = int(rng.integers(p + 1, 51))
        X = np.column_stack([np.ones(n)] + [rng.normal(size=n) * rng.uniform(0.5, 20) for _ in range(p - 1)])
        y = X @ rng.normal(size=p) + rng.normal(size=n)
        w = rng.uniform(0.2, 5.0, size=n)
        fit = fit_wls(X, y, w)
        Xw = X * w[:, None]
        ref = np.linalg.solve(X.T @ Xw, Xw.T @ y)
        coef_err = max(coef_err, float(np.max(np.abs(fit.coefficients - ref))))
        score = X.T @ (w * fit.residuals)
        scale = np.linalg.norm(X * np.sqrt(w)[:, None], axis=0) * max(np.linalg.norm(np.sqrt(w) * y), 1e-300)
        orth = max(orth, float(np.max(np.abs(score) / scale)))
    t_err = max(abs(student_t_sf(t, df) - quad_two_sided(t, df)) for df in DFS for t in T_GRID)
    ok = coef_err <= 1e-10 and orth <= 1e-8 and t_err <= 1e-8
    criterion(6, ok, f"Regression: coef vs normal equations {coef_err:.2e}, scaled X'Wr {orth:.2e}, "
                     f"t p-values vs quadrature {t_err:.2e}")
    assert ok


def _population(intercept_gap, seed, n=100_000):
    def variables():
        return (
            VariableSpec("age", "uniform", beta=0.06, low=18, high=60),
            VariableSpec("age_squared", "derived", beta=-0.0006),
            VariableSpec("edu", "categorical", beta={"primary": 0.15, "secondary": 0.35, "graduate": 0.8},
                         levels=("below_primary", "primary", "secondary", "graduate"),
                         probs=(0.3, 0.3, 0.25, 0.15)),
            VariableSpec("male", "bernoulli", beta=0.2, p=0.7),
            VariableSpec("public", "bernoulli", beta=0.25, p=0.3),
        )

    return PopulationSpec((
        GroupSpec("H", n, 4.0 + intercept_gap, variables(), noise_sd=0.5),
        GroupSpec("L", n, 4.0, variables(), noise_sd=0.5),
    ), seed=seed)


def test_ac7_synthetic_recovery(criterion):
    start = time.perf_counter()
    results = {}
    for label, gap, seed in (("gap", 0.30, 707), ("null", 0.0, 708)):
        spec = _population(gap, seed=seed)
        table = prepare(generate_population(spec))
        dd = decompose_from_data(table, population_design(spec), identity_grouping(spec), high="H", low="L")
        results[label] = dd.threefold
    elapsed = time.perf_counter() - start
    g, z = results["gap"], results["null"]
    z_scores = {
        "gap E": g.E / g.se["E"],
        "gap C-0.30": (g.C - 0.30) / g.se["C"],
        "null E": z.E / z.se["E"],
        "null C": z.C / z.se["C"],
        "null I": z.I / z.se["I"],
        "null W": z.W / z.se["W"],
    }
    ok = all(abs(v) <= 3 for v in z_scores.values()) and elapsed < 60
    detail = ", ".join(f"{k} {v:+.2f}se" for k, v in z_scores.items())
    criterion(7, ok, f"Synthetic recovery (n=1e5/group): {detail}; {elapsed:.1f}s")
    assert ok


def test_ac8_oracle_equivalence(criterion):
    rng = np.random.default_rng(808)
    theil_err = gini_err = 0.0
    for _ in range(1000):
        v = rng.lognormal(rng.uniform(-2, 6), rng.uniform(0.01, 2.5), size=int(rng.integers(1, 500)))
        theil_err = max(theil_err, abs(theil_index(v) - oracle_theil(v)) / max(oracle_theil(v), 1e-300))
        w = rng.uniform(0.1, 10, size=v.size)
        gp = gini_pairwise(v, w)
        gini_err = max(gini_err, abs(gini(v, w) - gp) / max(gp, 1e-300))
    dec_err = 0.0
    for i in range(100):
        n = int(rng.integers(20, 200))
        variables = (
            VariableSpec("age", "uniform", beta=float(rng.normal(0.03, 0.01)), low=20, high=55),
            VariableSpec("urban", "bernoulli", beta=float(rng.normal(0.1, 0.1)), p=float(rng.uniform(0.2, 0.8))),
            VariableSpec("edu", "categorical", beta={"b": float(rng.normal(0.3, 0.1))}, levels=("a", "b"),
                         probs=(0.5, 0.5)),
        )
        spec = PopulationSpec((GroupSpec("H", n, 4.3, variables, 0.3), GroupSpec("L", n + 7, 4.0, variables, 0.3)),
                              seed=1000 + i)
        table = prepare(generate_population(spec))
        design = population_design(spec)
        main = decompose_from_data(table, design, identity_grouping(spec), high="H", low="L", use_weights=False)
        ref = oracle_decomposition(table, design, identity_grouping(spec), "H", "L")
        t = main.threefold
        dec_err = max(dec_err, abs(t.E - ref["E"]), abs(t.C - ref["C"]), abs(t.I - ref["I"]))
    ok = theil_err <= 1e-10 and dec_err <= 1e-8 and gini_err <= 1e-10
    criterion(8, ok, f"Oracle equivalence: Theil rel {theil_err:.2e}, decomposition abs {dec_err:.2e}, "
                     f"Gini pairwise vs Lorenz rel {gini_err:.2e}")
    assert ok


def test_ac9_index_properties(criterion):
    rng = np.random.default_rng(909)
    alphas = (-1.0, 0.0, 1.0, 2.0)
    epsilons = (0.5, 1.0, 2.0)

    def indices(v, w=None):
        return np.array([ge_index(v, a, w) for a in alphas] + [atkinson(v, e, w) for e in epsilons] + [gini(v, w)])

    scale = repl = 0.0
    nonneg = zero_iff_equal = True
    for _ in range(500):
        n = int(rng.integers(1, 300))
        v = rng.lognormal(rng.uniform(-3, 8), rng.uniform(0.01, 2), size=n)
        base = indices(v)
        tol = np.maximum(np.abs(base), 1.0)
        scale = max(scale, float(np.max(np.abs(indices(v * rng.uniform(1e-3, 1e3)) - base) / tol)))
        repl = max(repl, float(np.max(np.abs(indices(np.tile(v, 3)) - base) / tol)),
                   float(np.max(np.abs(indices(v, np.full(n, 2.0)) - base) / tol)))
        nonneg &= bool(np.all(base >= 0))
        if n > 1 and np.ptp(v) > 0:
            zero_iff_equal &= bool(np.all(base > 0))
        const = indices(np.full(n, float(v[0])))
        zero_iff_equal &= bool(np.all(const == 0))
    ok = scale <= 1e-12 and repl <= 1e-12 and nonneg and zero_iff_equal
    criterion(9, ok, f"Index properties: scale {scale:.2e}, replication {repl:.2e}, non-negative={nonneg}, "
                     f"zero-iff-equal={zero_iff_equal}")
    assert ok


RUNS = (
    [("ineq", c) for c in ("two_value", "constant", "groups_ab", "survey", "coef_gap", "noiseless", "identical")]
    + [("theil-decomp", c) for c in ("groups_ab", "single_group", "survey", "coef_gap", "noiseless", "identical")]
    + [(cmd, c) for cmd in ("mincer", "oaxaca") for c in ("survey", "coef_gap", "noiseless", "identical")]
    + [("synth", c) for c in ("coef_gap", "noiseless")]
)

DRIVER = textwrap.dedent("""
    import json, sys
    from wagegap.cli import main
    fixtures, out_dir, runs = sys.argv[1], sys.argv[2], json.loads(sys.argv[3])
    for cmd, cfg in runs:
        for fmt in ("text", "csv", "json"):
            code = main([cmd, "--config", f"{fixtures}/{cfg}.yaml", "--format", fmt,
                         "--output", f"{out_dir}/{cmd}-{cfg}.{fmt}"])
            if code != 0:
                sys.exit(f"{cmd} {cfg} {fmt} exited {code}")
""")


def _run_suite(out_dir: Path, threads: int) -> dict[str, bytes]:
    out_dir.mkdir()
    env = dict(os.environ)
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        env[var] = str(threads)
    proc = subprocess.run([sys.executable, "-c", DRIVER, str(FIXTURES), str(out_dir), json.dumps(RUNS)],
                          env=env, capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
    return {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())}


def test_ac10_pipeline_determinism(criterion, tmp_path):
    first = _run_suite(tmp_path / "run1", threads=1)
    second = _run_suite(tmp_path / "run2", threads=1)
    wide = _run_suite(tmp_path / "run4", threads=4)
    expected = 3 * (len(RUNS))
    same_runs = first == second
    same_threads = first == wide
    ok = len(first) == expected and same_runs and same_threads
    criterion(10, ok, f"Pipeline determinism: {len(first)} outputs over {len(RUNS)} command/fixture pairs, "
                      f"repeat identical={same_runs}, 1 vs 4 threads identical={same_threads}")
    assert ok
