"""Verification driver: preconditions, exact/Monte-Carlo agreement, verdicts."""

import math

import numpy as np
import pytest

from demimart.generators import (
    adversarial_spec,
    bernoulli,
    centered,
    iid_spec,
    rademacher,
    shared_shock_spec,
    uniform,
)
from demimart.registry import (
    PreconditionError,
    all_entries,
    check_definition,
    lookup,
    verify,
    verify_detailed,
)
from demimart.stopping import (
    capped,
    deterministic,
    first_passage_down,
    first_passage_up,
    jump_if_high,
)

RAD6 = iid_spec(rademacher(), 6)
BERN6 = iid_spec(bernoulli(0.5), 6)


class TestLookup:
    def test_aliases_resolve(self):
        assert lookup("T3.1").theorem_id == "T3.1-OST-upper"
        assert lookup("L4.4").theorem_id == "L4.4/L4.6-lemma-grid"
        assert lookup("L4.6").theorem_id == "L4.4/L4.6-lemma-grid"
        assert lookup("C5.3").theorem_id == "C5.2/C5.3-wald-first"

    def test_unknown_id(self):
        with pytest.raises(PreconditionError, match="theorem_id"):
            lookup("T0.0")

    def test_every_entry_has_summary_and_owner(self):
        for entry in all_entries():
            assert entry.summary
            assert entry.owner in ("generators", "stopping", "bounds")


class TestPreconditions:
    def test_missing_required_param_named(self):
        with pytest.raises(PreconditionError, match="params.t: required"):
            verify("T4.7", RAD6, mode="exact", seed=1)

    def test_missing_rule_named(self):
        with pytest.raises(PreconditionError, match="stopping"):
            verify("T3.1", RAD6, mode="exact", seed=1)

    def test_t31_requires_demimartingale(self):
        with pytest.raises(PreconditionError, match="demimartingale"):
            verify("T3.1", BERN6, rule=capped(first_passage_up(1.0), 6), mode="exact", seed=1)

    def test_t31_rejects_wrong_direction_rule(self):
        """A down rule on a symmetric walk gets refuted by probing."""
        with pytest.raises(PreconditionError, match="not nondecreasing"):
            verify("T3.1", RAD6, rule=capped(first_passage_down(-1.0), 6), mode="exact", seed=1)

    def test_uncapped_rule_not_finite_at_horizon(self):
        with pytest.raises(PreconditionError, match="not a.s. finite"):
            verify("T3.1", iid_spec(rademacher(), 3), rule=first_passage_up(1.0), mode="exact", seed=1)

    def test_t32_requires_nonnegative_process(self):
        with pytest.raises(PreconditionError, match="nonneg"):
            verify("T3.2", RAD6, rule=capped(first_passage_up(1.0), 6), mode="exact", seed=1)

    def test_t23_checks_tau_ordering(self):
        with pytest.raises(PreconditionError, match="tau1 <= tau2"):
            verify(
                "T2.3",
                RAD6,
                rule=deterministic(5),
                rule2=deterministic(2),
                mode="exact",
                seed=1,
            )

    def test_wald_requires_identical_distribution(self):
        shifted = iid_spec(bernoulli(0.5), 6, offset=1.0)
        with pytest.raises(PreconditionError, match="identically distributed"):
            verify("C5.2", shifted, rule=deterministic(3), mode="exact", seed=1)

    def test_bernstein_rejects_offset_process(self):
        shifted = iid_spec(rademacher(), 6, offset=1.0)
        with pytest.raises(PreconditionError, match="E S_n = 0"):
            verify("T4.7", shifted, params={"t": 2.0}, mode="exact", seed=1)

    def test_exact_mode_needs_enumerable_family(self):
        cont = iid_spec(uniform(-1.0, 1.0), 4)
        with pytest.raises(PreconditionError, match="exact mode unavailable"):
            verify("T3.1", cont, rule=capped(first_passage_up(1.0), 4), mode="exact", seed=1)

    def test_lemma_grid_is_exact_only(self):
        with pytest.raises(PreconditionError, match="analytic"):
            verify("L4.4", mode="monte_carlo", seed=1)


class TestVerdicts:
    def test_t31_exact_equality(self):
        report = verify(
            "T3.1",
            iid_spec(rademacher(), 3),
            rule=capped(first_passage_up(1.0), 3),
            mode="exact",
            seed=1,
        )
        assert report.verdict == "PASS"
        assert report.exact
        assert report.lhs.stderr == 0.0
        assert report.lhs.mean == pytest.approx(0.0, abs=1e-12)
        assert report.z_margin is None

    def test_degenerate_two_stop_is_exactly_zero(self):
        rule = deterministic(3)
        report = verify("T2.3", RAD6, rule=rule, rule2=rule, mode="exact", seed=1)
        assert report.verdict == "PASS"
        assert report.lhs.mean == pytest.approx(0.0, abs=1e-15)

    def test_deterministic_order_collapses_to_equalities(self):
        report = verify(
            "T1.4", RAD6, rule=deterministic(1), params={"n": 2, "m": 5}, mode="exact", seed=1
        )
        assert report.verdict == "PASS"
        assert report.lhs.mean == pytest.approx(0.0, abs=1e-15)

    def test_adversarial_definition_fails_exactly(self):
        report = check_definition(adversarial_spec(4), "demimartingale", seed=5)
        assert report.verdict == "FAIL"
        assert report.exact
        assert report.lhs.mean == pytest.approx(-1.0, abs=1e-12)

    def test_wald_deterministic_equality(self):
        report = verify("C5.2", BERN6, rule=deterministic(4), mode="exact", seed=1)
        assert report.verdict == "PASS"
        assert report.lhs.mean == pytest.approx(0.0, abs=1e-12)

    def test_exp_stopped_jensen_branch(self):
        """Deterministic tau = 1 with a nonincreasing declaration: the >= 1
        comparison holds with strict slack (Jensen on a mean-zero start)."""
        report = verify(
            "C4.10",
            RAD6,
            rule=deterministic(1, "nonincreasing"),
            params={"theta": 0.5},
            mode="exact",
            seed=1,
        )
        assert report.verdict == "PASS"
        assert report.direction == ">="
        assert report.lhs.mean == pytest.approx(math.cosh(0.5), rel=1e-12)

    def test_exp_stopped_precheck_reported(self):
        report, results, extras = verify_detailed(
            "C4.10",
            RAD6,
            rule=capped(first_passage_up(1.0), 6),
            params={"theta": 0.3},
            mode="exact",
            seed=1,
        )
        assert "demisub_precheck" in extras
        assert extras["demisub_precheck"].verdict == "PASS"

    def test_tail_hit_rule_yields_inconclusive(self):
        """Too few expected tail hits for a conclusive Monte-Carlo verdict."""
        spec = iid_spec(rademacher(), 16)
        report = verify(
            "T4.7", spec, params={"t": 14.0}, mode="monte_carlo", paths=2000, seed=3
        )
        assert report.verdict == "INCONCLUSIVE"


class TestExactMonteCarloAgreement:
    def test_binding_statistics_agree_within_four_stderr(self):
        cases = [
            ("T3.3", BERN6, dict(rule=capped(first_passage_down(0.0), 6))),
            ("C5.2", BERN6, dict(rule=capped(first_passage_down(0.0), 6))),
            ("T4.7", iid_spec(rademacher(), 12), dict(params={"t": 3.0})),
        ]
        for tid, spec, kw in cases:
            exact_report, exact_results, _ = verify_detailed(
                tid, spec, mode="exact", seed=2, **kw
            )
            mc_report, mc_results, _ = verify_detailed(
                tid, spec, mode="monte_carlo", paths=100_000, seed=2, **kw
            )
            for er, mr in zip(exact_results, mc_results):
                assert er.name == mr.name
                tol = 4.0 * mr.stats.stderr if mr.stats.stderr > 0 else 1e-12
                assert abs(mr.stats.mean - er.stats.mean) <= tol, (tid, er.name)

    def test_mc_report_carries_z_margin(self):
        report = verify(
            "T3.3",
            BERN6,
            rule=capped(first_passage_down(0.0), 6),
            mode="monte_carlo",
            paths=50_000,
            seed=4,
        )
        assert not report.exact
        assert report.z_margin is not None and report.z_margin > 0
        assert report.verdict == "PASS"


class TestConcentrationExactSuite:
    def test_t47_passes_on_all_enumerable_instances(self):
        """Exact oracle tails sit below the bound for every independent
        mean-zero bounded instance tried."""
        instances = [
            (iid_spec(rademacher(), 8), 2.0),
            (iid_spec(rademacher(), 12), 4.0),
            (iid_spec(rademacher(), 16), 6.0),
            (centered(iid_spec(bernoulli(0.5), 10)), 2.0),
            (centered(iid_spec(bernoulli(0.25), 10)), 2.0),
        ]
        for spec, t in instances:
            report = verify("T4.7", spec, params={"t": t}, mode="exact", seed=1)
            assert report.verdict == "PASS", (spec.generator_id, t)
            assert report.exact

    def test_offset_preserves_optional_sampling(self):
        """A constant start shifts values but not the projection structure."""
        spec = iid_spec(rademacher(), 5, offset=3.0)
        report = verify(
            "T3.1", spec, rule=capped(first_passage_up(4.0), 5), mode="exact", seed=1
        )
        assert report.verdict == "PASS"


class TestDefinitionBattery:
    def test_demisubmartingale_variant_uses_nonnegative_battery(self):
        report = check_definition(BERN6, "demisubmartingale", seed=9)
        assert report.verdict == "PASS"

    def test_mean_zero_families_pass_full_battery(self):
        for spec in (RAD6, centered(iid_spec(bernoulli(0.5), 6)),
                     shared_shock_spec(rademacher(), rademacher(), 5)):
            report = check_definition(spec, "demimartingale", seed=9)
            assert report.verdict == "PASS", spec.family

    def test_uncentered_drift_caught_by_constant_member(self):
        """The constant -1 member turns positive drift into a violation."""
        report = check_definition(BERN6, "demimartingale", seed=9)
        assert report.verdict == "FAIL"
