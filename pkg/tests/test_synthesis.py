import random

import pytest

from capnet.cover import CoverProblem, solve_cover, verify_cover
from capnet.errors import AnnotationError, ConfigError, InfeasibleCoverError
from capnet.network import ConjugationGraph, Edge, Relation, RelationKind
from capnet.synthesis import (
    MovementSequence,
    annotate_requirements,
    enumerate_paths,
    lint_sequences,
    name_sequence,
    sequences_to_csv,
    sequences_to_text,
)
from capnet.taxonomy import parse_capability_id as pid

from oracles import brute_force_cover, brute_force_lex_min_cover

A, B, C, D, E = (pid(f"9.{i:02d}") for i in range(1, 6))


def chain_graph(*nodes):
    rel = Relation(RelationKind.CONDITION_FOR)
    edges = tuple(Edge(a, b, rel) for a, b in zip(nodes, nodes[1:]))
    return ConjugationGraph(nodes=tuple(sorted(nodes)), edges=edges)


class TestEnumeratePaths:
    def test_chain_of_four(self):
        graph = chain_graph(A, B, C, D)
        paths = enumerate_paths(graph, 4)
        assert list(paths) == [(A, B, C, D)]

    def test_chain_of_three_empty(self):
        graph = chain_graph(A, B, C)
        assert len(enumerate_paths(graph, 4)) == 0

    def test_reference_graph_contains_overhead_press_path(self, final_graph, sitting_set):
        sub = final_graph.restricted_to(sitting_set)
        paths = enumerate_paths(sub, 4)
        target = tuple(pid(x) for x in ("3.03.02", "1.06.02", "3.03.10", "3.04.10"))
        assert target in set(paths.paths)

    def test_paths_are_simple_and_edge_respecting(self, final_graph, sitting_set):
        sub = final_graph.restricted_to(sitting_set)
        edge_set = {(e.source, e.target) for e in sub.edges}
        paths = enumerate_paths(sub, 4)
        sample = random.Random(3).sample(list(paths), 200)
        for path in sample:
            assert len(set(path)) == len(path)
            for a, b in zip(path, path[1:]):
                assert (a, b) in edge_set

    def test_lexicographic_order(self):
        rel = Relation(RelationKind.CONDITION_FOR)
        graph = ConjugationGraph(
            nodes=(A, B, C, D, E),
            edges=(
                Edge(A, B, rel),
                Edge(A, C, rel),
                Edge(B, D, rel),
                Edge(C, D, rel),
                Edge(D, E, rel),
            ),
        )
        paths = list(enumerate_paths(graph, 3))
        assert paths == sorted(paths, key=lambda p: tuple(n.sort_key() for n in p))

    def test_minimum_length_is_lower_bound(self, final_graph, sitting_set):
        sub = final_graph.restricted_to(sitting_set)
        paths = enumerate_paths(sub, 6)
        assert all(len(p) >= 6 for p in paths)


class TestSolveCover:
    def test_seven_identical_paths_lexicographic(self):
        paths = tuple((A, B) for _ in range(7))
        problem = CoverProblem(paths=paths, node_set=(A, B), p_max=6, p_hat_max=7)
        solution = solve_cover(problem)
        assert solution.objective == 6
        assert solution.selected == (0, 1, 2, 3, 4, 5)
        assert solution.lexicographic

    def test_undercovered_node_reported(self):
        paths = tuple((A, C) for _ in range(5))
        problem = CoverProblem(paths=paths, node_set=(A, C), p_max=6, p_hat_max=7)
        with pytest.raises(InfeasibleCoverError) as err:
            solve_cover(problem)
        assert C in err.value.binding_nodes

    def test_brute_force_objective_agreement(self):
        rng = random.Random(404)
        nodes = [A, B, C, D, E]
        for _ in range(100):
            n_nodes = rng.randint(2, 5)
            node_set = tuple(nodes[:n_nodes])
            n_paths = rng.randint(1, 12)
            paths = tuple(
                tuple(sorted(rng.sample(node_set, rng.randint(1, n_nodes)), key=lambda x: x.sort_key()))
                for _ in range(n_paths)
            )
            p_max = rng.randint(1, 3)
            p_hat = p_max + rng.randint(0, 2)
            problem = CoverProblem(paths=paths, node_set=node_set, p_max=p_max, p_hat_max=p_hat)
            expected = brute_force_cover(paths, node_set, p_max, p_hat)
            if expected is None:
                with pytest.raises(InfeasibleCoverError):
                    solve_cover(problem)
            else:
                assert solve_cover(problem).objective == expected

    def test_lexicographic_minimum_matches_brute_force(self):
        rng = random.Random(808)
        nodes = [A, B, C, D]
        for _ in range(40):
            node_set = tuple(nodes[: rng.randint(2, 4)])
            n_paths = rng.randint(2, 9)
            paths = tuple(
                tuple(sorted(rng.sample(node_set, rng.randint(1, len(node_set))), key=lambda x: x.sort_key()))
                for _ in range(n_paths)
            )
            p_max = rng.randint(1, 2)
            problem = CoverProblem(paths=paths, node_set=node_set, p_max=p_max, p_hat_max=p_max + 1)
            expected = brute_force_lex_min_cover(paths, node_set, p_max, p_max + 1)
            if expected is None:
                with pytest.raises(InfeasibleCoverError):
                    solve_cover(problem)
            else:
                assert solve_cover(problem).selected == expected

    def test_independent_recount_on_solution(self):
        paths = tuple((A, B) for _ in range(7))
        problem = CoverProblem(paths=paths, node_set=(A, B), p_max=6, p_hat_max=7)
        solution = solve_cover(problem)
        counts = verify_cover(problem, solution.selected)
        assert counts == {A: 6, B: 6}
        with pytest.raises(AnnotationError):
            verify_cover(problem, (0,))

    def test_empty_node_set(self):
        problem = CoverProblem(paths=((A,),), node_set=(), p_max=1, p_hat_max=1)
        assert solve_cover(problem).objective == 0

    def test_bad_bounds_rejected(self):
        with pytest.raises(ConfigError):
            CoverProblem(paths=((A,),), node_set=(A,), p_max=2, p_hat_max=1)
        with pytest.raises(ConfigError):
            CoverProblem(paths=((A,),), node_set=(A,), p_max=0, p_hat_max=1)


class TestPipeline:
    def test_chain_with_single_visit_selects_one_sequence(self):
        from capnet.synthesis import synthesize

        graph = chain_graph(A, B, C, D)
        result = synthesize(graph, [A, B, C, D], n_min=4, p_max=1, p_hat_max=1)
        assert result.solution.objective == 1
        assert result.sequences[0].capability_ids() == (A, B, C, D)

    def test_byte_identical_sequence_tables(self, final_graph, sitting_set):
        from capnet.synthesis import synthesize

        first = synthesize(final_graph, sitting_set, n_min=4, p_max=2, p_hat_max=3)
        second = synthesize(final_graph, sitting_set, n_min=4, p_max=2, p_hat_max=3)
        assert sequences_to_csv(first.sequences) == sequences_to_csv(second.sequences)
        assert sequences_to_text(first.sequences) == sequences_to_text(second.sequences)


class TestAnnotate:
    def _sequences(self, paths, p_hat=7):
        nodes = sorted({n for p in paths for n in p})
        rel = Relation(RelationKind.CONDITION_FOR)
        edges = {}
        for path in paths:
            for a, b in zip(path, path[1:]):
                edges[(a, b)] = Edge(a, b, rel)
        graph = ConjugationGraph(nodes=tuple(nodes), edges=tuple(edges.values()))
        return annotate_requirements(paths, graph, p_hat)

    def test_six_encounters_get_full_scale(self):
        paths = [(A, B), (A, C), (A, D), (A, E), (A, B, C), (A, D, E)]
        sequences = self._sequences(paths)
        levels = [level for seq in sequences for cap, level in seq.steps if cap == A]
        assert levels == [1, 2, 3, 4, 5, 6]

    def test_levels_monotone_and_in_range(self):
        paths = [(A, B, C), (A, B, D), (B, C, D)]
        sequences = self._sequences(paths)
        per_cap = {}
        for seq in sequences:
            for cap, level in seq.steps:
                assert 1 <= level <= 6
                per_cap.setdefault(cap, []).append(level)
        for levels in per_cap.values():
            assert levels == sorted(levels)

    def test_lift_with_pinch_low_half(self):
        pinch, lift = pid("3.04.08"), pid("5.01.04")
        paths = [(pinch, lift), (pinch, lift, B)]
        sequences = self._sequences(paths)
        for seq in sequences:
            for cap, level in seq.steps:
                if cap == lift:
                    assert level <= 3

    def test_lift_with_fist_high_half(self):
        fist, lift = pid("3.04.02"), pid("5.01.03")
        sequences = self._sequences([(fist, lift), (fist, lift, B)])
        for seq in sequences:
            for cap, level in seq.steps:
                if cap == lift:
                    assert level >= 4

    def test_both_grips_count_as_pinch(self):
        pinch, fist, lift = pid("3.04.08"), pid("3.04.02"), pid("5.01.03")
        sequences = self._sequences([(fist, pinch, lift)])
        for cap, level in sequences[0].steps:
            if cap == lift:
                assert level <= 3

    def test_over_cap_occurrences_rejected(self):
        paths = [(A, B)] * 8
        with pytest.raises(AnnotationError):
            self._sequences(paths, p_hat=7)

    def test_non_edge_step_rejected(self):
        graph = chain_graph(A, B)
        with pytest.raises(AnnotationError):
            annotate_requirements([(B, A)], graph, 7)


class TestNaming:
    def _seq(self, *ids):
        return MovementSequence(0, tuple((pid(i), 1) for i in ids))

    def test_pull_out_from_behind(self):
        seq = self._seq("3.01.01", "3.03.08", "3.04.02", "5.01.04")
        assert name_sequence(seq) == "pull out, from behind"

    def test_reach_push_overhead(self):
        assert name_sequence(self._seq("3.03.02", "1.06.02")) == "reach & push, overhead"

    def test_empty_unnamed(self):
        assert name_sequence(MovementSequence(0, ())) == "unnamed"

    def test_pick_and_place(self):
        seq = self._seq("3.01.03", "3.02.01", "3.03.04", "3.04.02", "5.01.03")
        assert name_sequence(seq) == "pick & place, from side"

    def test_directional_fallbacks(self):
        assert name_sequence(self._seq("3.02.03", "3.03.06", "3.04.04")) == "reach & push, sideways"
        assert name_sequence(self._seq("3.02.03", "3.03.04", "3.04.04")) == "reach & push, frontal"


class TestLint:
    def _seq(self, seq_id, *ids):
        return MovementSequence(seq_id, tuple((pid(i), 1) for i in ids))

    def test_upward_lift_after_backward_reach_flagged(self):
        warnings = lint_sequences([self._seq(0, "3.01.01", "3.03.08", "3.04.02", "5.01.03")])
        assert len(warnings) == 1
        assert "5.01.03" in warnings[0]

    def test_horizontal_lift_mitigates(self):
        warnings = lint_sequences([self._seq(0, "3.03.08", "3.04.02", "5.01.01", "5.01.04")])
        assert warnings == []

    def test_empty(self):
        assert lint_sequences([]) == []


class TestRendering:
    def test_csv_shape(self):
        seq = MovementSequence(3, ((A, 1), (B, 6)), "demo name")
        text = sequences_to_csv([seq])
        lines = text.splitlines()
        assert lines[0] == "sequence_id,trivial_name,steps"
        assert lines[1] == '3,demo name,9.01:1 9.02:6'

    def test_text_shading(self):
        seq = MovementSequence(0, ((A, 1), (B, 6)), "demo")
        rendering = sequences_to_text([seq])
        assert ".9.01" in rendering and "@9.02" in rendering
