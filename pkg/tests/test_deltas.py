import random

import pytest

from capnet.deltas import (
    CompensationOutcome,
    DeltaSet,
    FuzzyParams,
    compensate,
    compute_delta,
    deficit_sum,
    is_feasible_fuzzy,
)
from capnet.errors import ConfigError, IncompleteProfileError
from capnet.network import (
    ConjugationGraph,
    Edge,
    Relation,
    RelationKind,
)
from capnet.profiles import Phase, Profile, RequirementSet
from capnet.taxonomy import parse_capability_id as pid

from oracles import exhaustive_shift_feasible

A, B, C, D = pid("3.03.04"), pid("3.02.03"), pid("3.04.02"), pid("5.01.01")


def graph_of(*pairs):
    nodes = sorted({n for pair in pairs for n in pair})
    edges = tuple(
        Edge(min(a, b), max(a, b), Relation(RelationKind.APPEARS_WITH)) for a, b in pairs
    )
    return ConjugationGraph(nodes=tuple(nodes), edges=edges)


def profile_of(values):
    return Profile("agent", Phase.UNSPECIFIED, values)


class TestComputeDelta:
    def test_identity(self):
        deltas = compute_delta(RequirementSet("k", {A: 4}), profile_of({A: 4}))
        assert deltas.deltas == {A: 0}

    def test_mixed(self):
        deltas = compute_delta(
            RequirementSet("k", {A: 5, B: 2}), profile_of({A: 3, B: 5})
        )
        assert deltas.deltas == {A: 2, B: -3}

    def test_elementwise_oracle(self):
        rng = random.Random(7)
        ids = [pid(f"3.03.{i:02d}") for i in range(1, 11)]
        for _ in range(50):
            reqs = {cap: rng.randint(0, 6) for cap in ids}
            caps = {cap: rng.randint(0, 6) for cap in ids}
            result = compute_delta(RequirementSet("k", reqs), profile_of(caps))
            assert result.deltas == {cap: reqs[cap] - caps[cap] for cap in ids}

    def test_antisymmetry(self):
        rng = random.Random(8)
        ids = [pid(f"3.04.{i:02d}") for i in range(1, 7)]
        values_a = {cap: rng.randint(0, 6) for cap in ids}
        values_b = {cap: rng.randint(0, 6) for cap in ids}
        forward = compute_delta(RequirementSet("k", values_a), profile_of(values_b))
        backward = compute_delta(RequirementSet("k", values_b), profile_of(values_a))
        assert forward.deltas == {cap: -d for cap, d in backward.deltas.items()}

    def test_missing_capability_listed(self):
        with pytest.raises(IncompleteProfileError) as err:
            compute_delta(RequirementSet("k", {A: 4, B: 1}), profile_of({A: 4}))
        assert B in err.value.missing


class TestDeficitSum:
    def test_zero(self):
        assert deficit_sum(DeltaSet("k", "i", {A: 0, B: 0})) == 0

    def test_reserves_do_not_offset(self):
        assert deficit_sum(DeltaSet("k", "i", {A: 2, B: -3})) == 2

    def test_multiple_deficits(self):
        assert deficit_sum(DeltaSet("k", "i", {A: 1, B: 1, C: -5})) == 2


class TestFuzzyFeasibility:
    def test_boundary_feasible(self):
        deltas = DeltaSet("k", "i", {A: 1, B: 0, C: -2})
        fuzz = FuzzyParams(xi={A: 1, B: 0, C: 0}, theta=1)
        report = is_feasible_fuzzy(deltas, fuzz)
        assert report.feasible
        assert bool(report)

    def test_per_capability_clause_violated(self):
        deltas = DeltaSet("k", "i", {A: 2, B: 0})
        report = is_feasible_fuzzy(deltas, FuzzyParams(xi={A: 1}, theta=9))
        assert not report.feasible
        assert report.per_capability_violations == ((A, 2, 1),)
        assert report.aggregate_violation is None

    def test_aggregate_clause_binds(self):
        deltas = DeltaSet("k", "i", {A: 1, B: 1})
        report = is_feasible_fuzzy(deltas, FuzzyParams(xi={A: 1, B: 1}, theta=1))
        assert not report.feasible
        assert report.per_capability_violations == ()
        assert report.aggregate_violation == (2, 1)

    def test_missing_xi_defaults_to_zero(self):
        deltas = DeltaSet("k", "i", {A: 1})
        assert not is_feasible_fuzzy(deltas, FuzzyParams(theta=5)).feasible

    def test_param_validation(self):
        with pytest.raises(ConfigError):
            FuzzyParams(xi={A: 7})
        with pytest.raises(ConfigError):
            FuzzyParams(theta=-1)
        with pytest.raises(ConfigError):
            is_feasible_fuzzy(DeltaSet("k", "i", {A: 0}), FuzzyParams(theta=7))


class TestCompensate:
    def test_reach_deficit_compensated_by_trunk_reserve(self):
        requirements = RequirementSet("k", {A: 5, B: 2})
        profile = profile_of({A: 4, B: 5})
        trace = compensate(requirements, profile, graph_of((A, B)), FuzzyParams())
        assert trace.outcome is CompensationOutcome.FEASIBLE_AFTER_COMPENSATION
        assert len(trace.steps) == 1
        step = trace.steps[0]
        assert (step.deficient, step.reserve, step.amount) == (A, B, 1)
        assert trace.final_requirements.requirements == {A: 4, B: 3}

    def test_all_reserves_is_direct(self):
        requirements = RequirementSet("k", {A: 2, B: 2})
        profile = profile_of({A: 5, B: 4})
        trace = compensate(requirements, profile, graph_of((A, B)), FuzzyParams())
        assert trace.outcome is CompensationOutcome.FEASIBLE_DIRECT
        assert trace.steps == ()

    def test_no_conjugated_reserve_is_infeasible(self):
        requirements = RequirementSet("k", {A: 5, B: 2})
        profile = profile_of({A: 3, B: 5})
        trace = compensate(requirements, profile, graph_of((A, C)), FuzzyParams())
        assert trace.outcome is CompensationOutcome.INFEASIBLE
        assert trace.final_requirements.requirements == requirements.requirements

    def test_empty_requirements_direct(self):
        trace = compensate(RequirementSet("k", {}), profile_of({}), graph_of((A, B)), FuzzyParams())
        assert trace.outcome is CompensationOutcome.FEASIBLE_DIRECT

    def test_requirement_sum_conserved(self):
        requirements = RequirementSet("k", {A: 6, B: 1, C: 3})
        profile = profile_of({A: 3, B: 5, C: 4})
        trace = compensate(
            requirements, profile, graph_of((A, B), (A, C)), FuzzyParams()
        )
        assert trace.final_requirements.total() == requirements.total()

    def test_backtracking_finds_the_only_split(self):
        # two deficits share reserve B; C also has a private reserve D.
        # Shifting A into B first is fine only if C uses D; a greedy pass
        # that also sends C into B would strand A.
        requirements = RequirementSet("k", {A: 4, C: 4, B: 3, D: 3})
        profile = profile_of({A: 3, C: 3, B: 4, D: 4})
        graph = graph_of((A, B), (C, B), (C, D))
        trace = compensate(requirements, profile, graph, FuzzyParams())
        assert trace.outcome is CompensationOutcome.FEASIBLE_AFTER_COMPENSATION
        assert trace.final_requirements.total() == requirements.total()

    def test_greedy_trap_requires_backtracking(self):
        # A and C are both deficient by 1, both conjugated only with B,
        # which can absorb a single unit. A's slack already covers its
        # deficit, so the only feasible end state shifts C, not A. The
        # largest-deficit-first order ties and tries A first; without
        # backtracking the verdict would be infeasible.
        requirements = RequirementSet("k", {A: 4, C: 4, B: 5})
        profile = profile_of({A: 3, C: 3, B: 6})
        fuzz = FuzzyParams(xi={A: 1}, theta=1)
        graph = graph_of((A, B), (C, B))
        trace = compensate(requirements, profile, graph, fuzz)
        assert trace.outcome is CompensationOutcome.FEASIBLE_AFTER_COMPENSATION
        assert exhaustive_shift_feasible(
            requirements.requirements,
            profile.values,
            {frozenset((A, B)), frozenset((C, B))},
            {A: 1},
            1,
        )

    def test_deterministic_step_order(self):
        requirements = RequirementSet("k", {A: 5, C: 5, B: 1, D: 1})
        profile = profile_of({A: 3, C: 3, B: 4, D: 4})
        graph = graph_of((A, B), (A, D), (C, B), (C, D))
        first = compensate(requirements, profile, graph, FuzzyParams())
        second = compensate(requirements, profile, graph, FuzzyParams())
        assert first.steps == second.steps

    def test_feasible_outcome_has_feasible_report(self):
        rng = random.Random(41)
        ids = [A, B, C, D]
        for _ in range(200):
            reqs = {cap: rng.randint(0, 6) for cap in ids}
            caps = {cap: rng.randint(0, 6) for cap in ids}
            pairs = [(A, B), (C, D), (B, C)]
            graph = graph_of(*pairs)
            fuzz = FuzzyParams(theta=rng.randint(0, 2))
            trace = compensate(RequirementSet("k", reqs), profile_of(caps), graph, fuzz)
            if trace.outcome is not CompensationOutcome.INFEASIBLE:
                assert trace.final_report.feasible
                assert trace.final_requirements.total() == sum(reqs.values())

    def test_verdict_matches_exhaustive_oracle(self):
        rng = random.Random(2024)
        ids = [A, B, C, D]
        all_pairs = [(A, B), (A, C), (A, D), (B, C), (B, D), (C, D)]
        for _ in range(300):
            reqs = {cap: rng.randint(0, 5) for cap in ids}
            caps = {cap: rng.randint(0, 6) for cap in ids}
            if sum(max(0, reqs[c] - caps[c]) for c in ids) > 6:
                continue
            pairs = [p for p in all_pairs if rng.random() < 0.5]
            xi = {cap: rng.randint(0, 1) for cap in ids if rng.random() < 0.4}
            theta = rng.randint(0, 3)
            fuzz = FuzzyParams(xi=xi, theta=theta)
            trace = compensate(
                RequirementSet("k", reqs), profile_of(caps), graph_of(*pairs) if pairs else graph_of((A, B)), fuzz
            )
            pair_set = {frozenset(p) for p in (pairs if pairs else [(A, B)])}
            expected = exhaustive_shift_feasible(reqs, caps, pair_set, xi, theta)
            got = trace.outcome is not CompensationOutcome.INFEASIBLE
            assert got == expected

    def test_trace_serialization(self):
        requirements = RequirementSet("k", {A: 5, B: 2})
        profile = profile_of({A: 4, B: 5})
        trace = compensate(requirements, profile, graph_of((A, B)), FuzzyParams())
        text = trace.text_report()
        assert "feasible_after_compensation" in text
        assert f"shift 1 from {A} to {B}" in text
        doc = trace.to_document()
        assert '"outcome": "feasible_after_compensation"' in doc

    def test_steps_use_conjugated_pairs_only(self):
        requirements = RequirementSet("k", {A: 6, B: 0, C: 0})
        profile = profile_of({A: 2, B: 4, C: 4})
        graph = graph_of((A, B), (A, C))
        trace = compensate(requirements, profile, graph, FuzzyParams(theta=2))
        for step in trace.steps:
            assert graph.are_conjugated(step.deficient, step.reserve)

    def test_incomplete_profile_rejected(self):
        with pytest.raises(IncompleteProfileError):
            compensate(
                RequirementSet("k", {A: 4, B: 2}),
                profile_of({A: 4}),
                graph_of((A, B)),
                FuzzyParams(),
            )
