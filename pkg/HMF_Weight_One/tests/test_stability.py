import pytest

from core.coeff_ring import IntegerRing
from core.errors import BoundMismatchError, UnsupportedError
from core.ideals import ideal_from_label, unit_ideal
from core.linalg import echelon_key
from core.qexp import WeightVector, truncate
from core.stability import (
    EscalationStep,
    SturmPlan,
    build_report,
    candidate_space,
    default_schedule,
    escalate_bound,
    largest_stable_submodule,
    prime_list,
    squaring_test,
    sturm_heuristic,
)
from tests.conftest import indicator_series, random_series


def _over_integers(series_list):
    return [f.over(IntegerRing()) for f in series_list]


class TestCandidateSpace:
    """E^-1 times a basis of higher weight forms."""

    def test_weight_and_rank(self, synthetic_run6):
        multiplier, basis, _, _ = synthetic_run6
        space = candidate_space(multiplier, basis)
        assert space.weight == WeightVector(1, 1)
        assert space.rank == 3
        assert space.bound == 40

    def test_multiplier_divides_out(self, synthetic_run6, eisenstein_pair6):
        multiplier, basis, _, _ = synthetic_run6
        space = candidate_space(multiplier, basis[:1])
        assert space.series()[0] == eisenstein_pair6[0]

    def test_empty_basis(self, synthetic_run6):
        multiplier, _, _, _ = synthetic_run6
        space = candidate_space(multiplier, [])
        assert space.rank == 0
        assert space.weight == WeightVector(-1, -1)

    def test_rejects_mixed_weights_and_low_precision(self, classes6, rationals, synthetic_run6):
        multiplier, basis, _, _ = synthetic_run6
        other = random_series(classes6, rationals, 40, weight=WeightVector(3, 3), seed=1)
        with pytest.raises(UnsupportedError):
            candidate_space(multiplier, [basis[0], other])
        with pytest.raises(BoundMismatchError):
            candidate_space(truncate(multiplier, 20), basis, bound=40)


class TestLargestStableSubmodule:
    """Cutting the candidate space down to its Hecke stable part."""

    def test_synthetic_run_over_q(self, synthetic_run6):
        multiplier, basis, ctx, _ = synthetic_run6
        stable = largest_stable_submodule(candidate_space(multiplier, basis), ctx)
        assert stable.rank == 2
        assert [(r.ideal, r.rank_before, r.rank_after) for r in stable.provenance] == [("2.0.1", 3, 2)]

    def test_stable_space_is_spanned_by_the_eisenstein_series(self, synthetic_run6, eisenstein_pair6):
        multiplier, basis, ctx, _ = synthetic_run6
        stable = largest_stable_submodule(candidate_space(multiplier, basis), ctx)
        expected = [f.to_vector() for f in eisenstein_pair6]
        assert echelon_key(stable.ring, stable.columns, stable.rows) == echelon_key(stable.ring, expected, stable.rows)

    def test_stable_input_is_left_alone(self, synthetic_run6):
        multiplier, basis, ctx, _ = synthetic_run6
        stable = largest_stable_submodule(candidate_space(multiplier, basis[:2]), ctx)
        assert stable.rank == 2
        assert stable.provenance == []

    def test_unstable_line_vanishes(self, classes6, rationals, synthetic_run6):
        multiplier, _, ctx, _ = synthetic_run6
        space = candidate_space(multiplier, [multiplier * indicator_series(classes6, rationals, 40, "5.1.1")])
        assert largest_stable_submodule(space, ctx).rank == 0

    @pytest.mark.parametrize("s", [2, 3, 6])
    def test_over_the_integers_ignores_scaling(self, synthetic_run6, s):
        """Scaling the whole basis by s gives the same saturated stable module."""
        multiplier, basis, ctx, _ = synthetic_run6
        z = IntegerRing()
        plain = largest_stable_submodule(candidate_space(multiplier.over(z), _over_integers(basis)), ctx)
        scaled_basis = [f.scale(z.from_int(s)) for f in _over_integers(basis)]
        scaled = largest_stable_submodule(candidate_space(multiplier.over(z), scaled_basis), ctx)
        assert plain.rank == scaled.rank == 2
        assert echelon_key(z, plain.columns, plain.rows) == echelon_key(z, scaled.columns, scaled.rows)
        report = prime_list(plain)
        assert report.inverted == []
        assert all(p > 1 for p in report.primes)

    def test_default_schedule(self, classes6):
        """Every ideal other than O with N(m)^2 <= B."""
        labels = [ideal.label for ideal in default_schedule(classes6, 40)]
        assert labels[0] == "2.0.1"
        assert "1.0.7" not in labels
        norms = [int(ideal_from_label(classes6.field, label).norm()) for label in labels]
        assert max(norms) <= 6
        assert norms == sorted(norms)


class TestSquaringTest:
    """beta^2 against a basis of forms of weight 2k."""

    def test_statuses(self, classes6, rationals, synthetic_run6, eisenstein_pair6):
        _, _, _, square_basis = synthetic_run6
        plain, twisted = eisenstein_pair6
        assert squaring_test(plain, square_basis) == "verified"
        assert squaring_test(twisted, square_basis) == "verified"
        assert squaring_test(indicator_series(classes6, rationals, 40, "5.1.1"), square_basis) == "failed"
        assert squaring_test(plain, None) == "unverified"
        assert squaring_test(plain, []) == "unverified"

    def test_square_basis_of_the_wrong_weight(self, classes6, rationals, eisenstein_pair6):
        plain, _ = eisenstein_pair6
        with pytest.raises(UnsupportedError) as info:
            squaring_test(plain, [indicator_series(classes6, rationals, 40, "5.1.1")])
        assert info.value.context["found"] == [str(plain.weight)]


class TestSturmAndEscalation:
    """The certified bound and the escalation schedule."""

    def test_hard_bound(self):
        plan = sturm_heuristic(1, 1, 331)
        assert plan.hard_bound == 4 * 331**3
        assert plan.plan == [500, 1000, 1500, 2000]
        assert sturm_heuristic(1, 1, 1).hard_bound == 4

    def test_escalation_stops_when_results_repeat(self):
        answers = {500: (3, 1), 1000: (2, 1), 1500: (2, 1), 2000: (2, 1)}
        steps = escalate_bound(lambda bound: answers[bound], sturm_heuristic(1, 1, 331))
        assert [step.bound for step in steps] == [500, 1000, 1500]
        assert all(step.label == "heuristic" for step in steps)
        assert steps[-1] == EscalationStep(bound=1500, dimension=2, eigenforms=1, label="heuristic")

    def test_escalation_above_the_hard_bound_is_certified(self):
        steps = escalate_bound(lambda bound: (1, 1), SturmPlan(hard_bound=600, plan=[500, 1000]))
        assert [step.label for step in steps] == ["heuristic", "certified"]

    def test_escalation_runs_out_of_plan(self):
        calls = []

        def run(bound):
            calls.append(bound)
            return bound // 500, 0

        steps = escalate_bound(run, sturm_heuristic(1, 1, 331, step=500, maximum=1500))
        assert calls == [500, 1000, 1500]
        assert len(steps) == 3


class TestReports:
    """Prime lists and run reports."""

    def test_prime_list_over_a_field(self, synthetic_run6):
        multiplier, basis, _, _ = synthetic_run6
        report = prime_list(candidate_space(multiplier, basis))
        assert report.primes == []
        assert report.note

    def test_build_report(self, classes6, synthetic_run6):
        multiplier, basis, ctx, _ = synthetic_run6
        stable = largest_stable_submodule(candidate_space(multiplier, basis), ctx)
        report = build_report(stable, unit_ideal(classes6.field), WeightVector(2, 2), hard_bound=4)
        assert report.dimension == 2
        assert report.field == 6
        assert report.level == "1.0.1"
        assert report.label == "certified"
        assert report.trace[0].ideal == "2.0.1"
        assert {a.name for a in report.assumptions} == {"sturm", "hecke_generation"}

    def test_report_over_the_integers_lists_more_assumptions(self, classes6, synthetic_run6):
        multiplier, basis, ctx, _ = synthetic_run6
        z = IntegerRing()
        space = candidate_space(multiplier.over(z), _over_integers(basis))
        report = build_report(space, unit_ideal(classes6.field), WeightVector(2, 2), hard_bound=10**6)
        assert report.label == "heuristic"
        names = {a.name for a in report.assumptions}
        assert {"surjectivity", "pid"} <= names
        surjectivity = next(a for a in report.assumptions if a.name == "surjectivity")
        assert "parallel weight 2" in surjectivity.statement
