import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wagegap.decomposition import (
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
from wagegap.errors import ColumnMismatchError, DomainError, ValidationError
from wagegap.microdata import prepare
from wagegap.synthlab import GroupSpec, PopulationSpec, VariableSpec, generate_population
from wagegap.synthlab.population import identity_grouping, population_design

NAMES = ("_cons", "x")
HIGH = GroupStats(NAMES, [1.0, 2.0], [1.0, 0.5], label="H")
LOW = GroupStats(NAMES, [1.0, 1.0], [0.8, 0.4], label="L")


def random_stats(rng, p, label):
    mean_X = np.concatenate(([1.0], rng.uniform(-5, 5, size=p - 1)))
    return GroupStats(tuple(["_cons"] + [f"v{j}" for j in range(1, p)]), mean_X, rng.normal(size=p), label=label)


class TestThreefold:
    def test_derived_example(self):
        r = threefold(HIGH, LOW)
        assert (r.W, r.E, r.C, r.I) == pytest.approx((0.8, 0.4, 0.3, 0.1), abs=1e-15)
        assert r.reference == "low"
        assert (r.high, r.low) == ("H", "L")

    def test_identical_groups(self):
        r = threefold(HIGH, HIGH)
        assert (r.W, r.E, r.C, r.I) == (0, 0, 0, 0)

    def test_equal_means(self):
        other = GroupStats(NAMES, [1.0, 2.0], [0.3, 0.1])
        r = threefold(HIGH, other)
        assert r.E == 0 and r.I == 0
        assert r.C == pytest.approx(r.W, abs=1e-15)

    def test_intercept_row_only_coefficients(self):
        r = threefold(HIGH, LOW)
        assert r.endowments[0] == 0 and r.interactions[0] == 0
        assert r.coefficients[0] == pytest.approx(0.2, abs=1e-15)

    def test_column_mismatch_lists_difference(self):
        other = GroupStats(("_cons", "z"), [1.0, 1.0], [0.0, 0.0])
        with pytest.raises(ColumnMismatchError, match="x, z"):
            threefold(HIGH, other)

    def test_reorders_columns(self):
        swapped = GroupStats(("x", "_cons"), [1.0, 1.0], [0.4, 0.8], label="L")
        assert threefold(HIGH, swapped).E == pytest.approx(0.4, abs=1e-15)

    def test_intercept_required(self):
        a = GroupStats(("x",), [1.0], [1.0])
        with pytest.raises(ValidationError):
            threefold(a, a)

    def test_high_reference(self):
        r = threefold(HIGH, LOW, reference="high")
        assert r.E == pytest.approx(0.5, abs=1e-15)
        assert r.E + r.C + r.I == pytest.approx(r.W, abs=1e-15)
        with pytest.raises(ValidationError):
            threefold(HIGH, LOW, reference="pooled")

    def test_bad_shapes(self):
        with pytest.raises(ValidationError):
            GroupStats(NAMES, [1.0], [1.0, 2.0])

    def test_swap_identities(self):
        r = threefold(HIGH, LOW)
        s = threefold(LOW, HIGH)
        assert s.W == pytest.approx(-r.W, abs=1e-15)
        assert s.E == pytest.approx(-(r.E + r.I), abs=1e-15)
        assert s.C == pytest.approx(-(r.C + r.I), abs=1e-15)
        assert s.I == pytest.approx(r.I, abs=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8))
    def test_identities_random(self, seed, p):
        rng = np.random.default_rng(seed)
        h, lo = random_stats(rng, p, "H"), random_stats(rng, p, "L")
        r = threefold(h, lo)
        s = threefold(lo, h)
        tol = 1e-12 * max(1.0, abs(r.W))
        assert abs(r.W - (r.E + r.C + r.I)) <= tol
        assert abs(s.W + r.W) <= tol
        assert abs(s.E + r.E + r.I) <= tol
        assert abs(s.C + r.C + r.I) <= tol
        assert abs(s.I - r.I) <= tol
        assert abs(np.sum(r.endowments) - r.E) <= tol
        b = blinder_original(h, lo)
        assert b.R == b.E + b.C + b.U
        assert b.D == b.C + b.U


class TestPercent:
    def test_derived(self):
        shares = percent_report(threefold(HIGH, LOW))
        assert [shares[k] for k in "ECI"] == pytest.approx([50.0, 37.5, 12.5], abs=1e-12)

    def test_seven_decimal_components(self):
        r = ThreefoldResult.from_components(0.3475596, 0.0571873, 0.0830914)
        assert r.W == pytest.approx(0.4878383, abs=1e-12)
        shares = percent_report(r)
        assert [shares[k] for k in "ECI"] == pytest.approx([71.24, 11.72, 17.03], abs=0.01)

    def test_all_endowment(self):
        assert percent_shares(0.2, 0.0, 0.0) == {"E": 100.0, "C": 0.0, "I": 0.0, "W": 100.0}

    def test_zero_gap(self):
        r = threefold(HIGH, HIGH)
        with pytest.raises(DomainError):
            percent_report(r)
        assert percent_report(r, strict=False)["E"] is None
        with pytest.raises(DomainError):
            detailed_table(r)
        assert detailed_table(r, strict=False)[-1]["total_pct"] is None

    def test_detailed_rows(self):
        rows = detailed_table(threefold(HIGH, LOW))
        assert [r["variable"] for r in rows] == ["_cons", "x", "Subtotal"]
        sub = rows[-1]
        for key, agg in (("endowment", 0.4), ("coefficient", 0.3), ("interaction", 0.1)):
            assert sum(r[key] for r in rows[:-1]) == pytest.approx(sub[key], abs=1e-12)
            assert sub[key] == pytest.approx(agg, abs=1e-15)
        assert sub["total_pct"] == pytest.approx(100.0, abs=1e-12)

    def test_single_regressor_row_matches_aggregate(self):
        a = GroupStats(("_cons",), [1.0], [2.0])
        b = GroupStats(("_cons",), [1.0], [1.5])
        rows = detailed_table(threefold(a, b))
        assert {k: v for k, v in rows[0].items() if k != "variable"} == \
               {k: v for k, v in rows[1].items() if k != "variable"}


class TestBlinder:
    def test_derived(self):
        b = blinder_original(HIGH, LOW)
        assert (b.E, b.C, b.U, b.R, b.D) == pytest.approx((0.5, 0.1, 0.2, 0.8, 0.3), abs=1e-15)
        assert b.total == pytest.approx(0.8, abs=1e-15)

    def test_percent_unit_components(self):
        b = BlinderResult.from_components(43.1, 6.1, -0.4)
        assert b.R == pytest.approx(48.8, abs=0.05)
        assert b.D == pytest.approx(5.7, abs=0.05)
        assert b.endowment_ratio == pytest.approx(88.3, abs=0.05)
        assert b.discrimination_ratio == pytest.approx(11.7, abs=0.05)

    def test_identical_groups_ratio_undefined(self):
        b = blinder_original(HIGH, HIGH)
        assert (b.E, b.C, b.U, b.R, b.D) == (0, 0, 0, 0, 0)
        assert not b.ratios_defined
        with pytest.raises(DomainError):
            b.endowment_ratio
        with pytest.raises(DomainError):
            b.discrimination_ratio


def _two_groups(n, beta_gap=0.0, mean_shift=0.0, noise=0.05, seed=3):
    def group(name, p_urban, gap):
        return GroupSpec(name, n, 4.5, (
            VariableSpec("age", "uniform", beta=0.03, low=20, high=55),
            VariableSpec("urban", "bernoulli", beta=0.2 + gap, p=p_urban),
        ), noise)

    return PopulationSpec((group("H", 0.5 + mean_shift, beta_gap), group("L", 0.5, 0.0)), seed=seed)


class TestFromData:
    def test_mean_identity_and_order(self):
        spec = _two_groups(400, beta_gap=0.1, mean_shift=0.2)
        t = prepare(generate_population(spec))
        dd = decompose_from_data(t, population_design(spec), identity_grouping(spec))
        assert (dd.high, dd.low) == ("H", "L")
        assert dd.threefold.W == pytest.approx(dd.mean_gap, abs=1e-10)
        assert set(dd.threefold.se) == {"W", "E", "C", "I"}

    def test_swapped_groups(self):
        spec = _two_groups(300, beta_gap=0.1, mean_shift=0.2)
        t = prepare(generate_population(spec))
        g = identity_grouping(spec)
        a = decompose_from_data(t, population_design(spec), g, high="H", low="L").threefold
        b = decompose_from_data(t, population_design(spec), g, high="L", low="H").threefold
        assert b.W == pytest.approx(-a.W, abs=1e-12)
        assert b.E == pytest.approx(-(a.E + a.I), abs=1e-12)
        assert b.C == pytest.approx(-(a.C + a.I), abs=1e-12)
        assert b.I == pytest.approx(a.I, abs=1e-12)

    def test_translation_leaves_components(self):
        spec = _two_groups(300, beta_gap=0.1, mean_shift=0.2)
        t = prepare(generate_population(spec))
        shifted = t.with_column("log_daily_wage", t["log_daily_wage"] + 2.5)
        design = population_design(spec)
        g = identity_grouping(spec)
        a = decompose_from_data(t, design, g).threefold
        b = decompose_from_data(shifted, design, g).threefold
        for k in "WECI":
            assert getattr(b, k) == pytest.approx(getattr(a, k), abs=1e-10)

    def test_unknown_group_rejected(self):
        spec = _two_groups(50)
        t = prepare(generate_population(spec))
        with pytest.raises(ValidationError):
            decompose_from_data(t, population_design(spec), {"H": "a", "L": "b"}, high="a", low="c")
