"""Movement-sequence synthesis: path enumeration, annotation, naming, lint.

A movement sequence is one directed path through the over-table subgraph
of the conjugation graph, annotated with quantified requirement levels.
Paths of at least ``n_min`` nodes are enumerated, a minimal multicover
selection is solved exactly (see cover module), and each capability's
encounters across the selected paths receive levels spread from low to
high in encounter order.

Lifting levels follow the grip context: waist-to-eye and waist-overhead
lifts sharing a path with the pinch grip draw from the low half {1..3}
(nobody pinch-grips heavy weights), those sharing a path with the fist
grip draw from the high half {4..6}. A path containing both grips counts
as pinch, the protective rule.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .cover import CoverProblem, CoverSolution, DEFAULT_P_HAT_MAX, DEFAULT_P_MAX, solve_cover
from .errors import AnnotationError
from .network import ConjugationGraph
from .taxonomy import CapabilityId, parse_capability_id

__all__ = [
    "PathSet",
    "MovementSequence",
    "enumerate_paths",
    "annotate_requirements",
    "name_sequence",
    "lint_sequences",
    "synthesize",
    "sequences_to_csv",
    "sequences_to_text",
    "DEFAULT_N_MIN",
]

DEFAULT_N_MIN = 4

_PINCH = parse_capability_id("3.04.08")
_FIST = parse_capability_id("3.04.02")
_LIFTS = (parse_capability_id("5.01.01"), parse_capability_id("5.01.03"), parse_capability_id("5.01.04"))
_UPWARD_LIFTS = (parse_capability_id("5.01.03"), parse_capability_id("5.01.04"))
_HORIZONTAL_LIFT = parse_capability_id("5.01.01")
_REACH_BACKWARD = parse_capability_id("3.03.08")
_REACH_OVERHEAD = parse_capability_id("3.03.02")
_ARMS_OVERHEAD = parse_capability_id("1.06.02")
_REACH_FORWARD = parse_capability_id("3.03.04")
_REACH_SIDEWAYS = parse_capability_id("3.03.06")
_HEAD_SIDEWAYS = parse_capability_id("3.01.03")
_TRUNK_ROTATION = parse_capability_id("3.02.01")


@dataclass(frozen=True)
class PathSet:
    """Deterministically ordered simple directed paths."""

    paths: tuple[tuple[CapabilityId, ...], ...]
    n_min: int

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)

    def __getitem__(self, index: int) -> tuple[CapabilityId, ...]:
        return self.paths[index]


def enumerate_paths(graph: ConjugationGraph, n_min: int = DEFAULT_N_MIN) -> PathSet:
    """All simple directed paths with at least n_min nodes.

    Paths may begin and end on any node. Order is lexicographic by node
    sequence. Every emitted step is checked against the adjacency, so a
    corrupted traversal cannot slip through.
    """
    if n_min < 1:
        raise ValueError(f"n_min must be >= 1, got {n_min}")
    successors = {node: graph.successors(node) for node in graph.nodes}
    edge_set = {(e.source, e.target) for e in graph.edges}
    collected: list[tuple[CapabilityId, ...]] = []

    def walk(node: CapabilityId, trail: list[CapabilityId]) -> None:
        trail.append(node)
        if len(trail) >= n_min:
            for a, b in zip(trail, trail[1:]):
                if (a, b) not in edge_set:
                    raise AnnotationError(f"enumerated step {a}->{b} is not an edge")
            collected.append(tuple(trail))
        for child in successors[node]:
            walk(child, trail)
        trail.pop()

    for start in sorted(graph.nodes):
        walk(start, [])
    collected.sort(key=lambda path: tuple(node.sort_key() for node in path))
    return PathSet(paths=tuple(collected), n_min=n_min)


@dataclass(frozen=True)
class MovementSequence:
    sequence_id: int
    steps: tuple[tuple[CapabilityId, int], ...]
    trivial_name: str = ""

    def capability_ids(self) -> tuple[CapabilityId, ...]:
        return tuple(cap for cap, _ in self.steps)


def _spread_levels(count: int, low: int, high: int) -> list[int]:
    """count levels spread evenly over [low, high], non-decreasing."""
    if count == 1:
        return [low]
    return [int(v) for v in np.rint(np.linspace(low, high, count))]


def _lift_stream(path: Sequence[CapabilityId], cap: CapabilityId) -> str:
    if cap in _UPWARD_LIFTS:
        if _PINCH in path:
            return "pinch"
        if _FIST in path:
            return "fist"
    return "neutral"


_STREAM_RANGE = {"pinch": (1, 3), "fist": (4, 6), "neutral": (1, 6)}


def annotate_requirements(
    selected_paths: Sequence[Sequence[CapabilityId]],
    graph: ConjugationGraph,
    p_hat_max: int = DEFAULT_P_HAT_MAX,
) -> list[MovementSequence]:
    """Assign requirement levels to every step of the selected paths.

    Per capability, encounters across the paths (path order, then step
    order) receive levels from low to high; a capability seen six times
    gets exactly 1..6. Lifting capabilities are split into grip-context
    streams first (see module docstring). Raises AnnotationError when a
    capability occurs more often than p_hat_max or a path step is not a
    graph edge.
    """
    for path in selected_paths:
        for a, b in zip(path, path[1:]):
            if not graph.has_edge(a, b):
                raise AnnotationError(f"selected path step {a}->{b} is not a graph edge")

    # encounter lists per (capability, stream)
    encounters: dict[tuple[CapabilityId, str], list[tuple[int, int]]] = {}
    totals: dict[CapabilityId, int] = {}
    for path_pos, path in enumerate(selected_paths):
        for step_pos, cap in enumerate(path):
            stream = _lift_stream(path, cap)
            encounters.setdefault((cap, stream), []).append((path_pos, step_pos))
            totals[cap] = totals.get(cap, 0) + 1

    for cap, total in sorted(totals.items()):
        if total > p_hat_max:
            raise AnnotationError(f"{cap} occurs {total} times, above the cap {p_hat_max}")

    level_at: dict[tuple[int, int], int] = {}
    for (cap, stream), places in sorted(encounters.items(), key=lambda kv: (kv[0][0].sort_key(), kv[0][1])):
        low, high = _STREAM_RANGE[stream]
        for place, level in zip(places, _spread_levels(len(places), low, high)):
            level_at[place] = level

    sequences = []
    for path_pos, path in enumerate(selected_paths):
        steps = tuple((cap, level_at[(path_pos, step_pos)]) for step_pos, cap in enumerate(path))
        sequences.append(MovementSequence(sequence_id=path_pos, steps=steps))
    return sequences


def name_sequence(sequence: MovementSequence) -> str:
    """Heuristic trivial name summarizing the movement."""
    caps = set(sequence.capability_ids())
    if not caps:
        return "unnamed"
    if _REACH_BACKWARD in caps:
        return "pull out, from behind"
    if _ARMS_OVERHEAD in caps or _REACH_OVERHEAD in caps:
        return "reach & push, overhead"
    if any(lift in caps for lift in _LIFTS) and (_PINCH in caps or _FIST in caps):
        return "pick & place, from side"
    if _REACH_SIDEWAYS in caps or _HEAD_SIDEWAYS in caps or _TRUNK_ROTATION in caps:
        return "reach & push, sideways"
    if _REACH_FORWARD in caps:
        return "reach & push, frontal"
    return "reach & push, frontal"


def lint_sequences(sequences: Iterable[MovementSequence]) -> list[str]:
    """Flag upward lifts that follow a backward reach with no horizontal lift.

    Lifting upward while the arms are still in a backwards position is an
    awkward test primitive; the warning suggests inserting the horizontal
    lift first or forbidding lift generation after backward reaches.
    """
    warnings = []
    for sequence in sequences:
        ids = list(sequence.capability_ids())
        for i, cap in enumerate(ids):
            if cap != _REACH_BACKWARD:
                continue
            tail = ids[i + 1 :]
            for later in tail:
                if later == _HORIZONTAL_LIFT:
                    break
                if later in _UPWARD_LIFTS:
                    warnings.append(
                        f"sequence {sequence.sequence_id}: upward lift {later} follows "
                        f"backward reach without an intervening horizontal lift; insert "
                        f"{_HORIZONTAL_LIFT} before the lift or forbid lifts after backward reaches"
                    )
                    break
            else:
                continue
            break
    return warnings


@dataclass(frozen=True)
class SynthesisResult:
    path_set: PathSet
    solution: CoverSolution
    sequences: tuple[MovementSequence, ...]
    warnings: tuple[str, ...]


def synthesize(
    graph: ConjugationGraph,
    node_set: Sequence[CapabilityId],
    n_min: int = DEFAULT_N_MIN,
    p_max: int = DEFAULT_P_MAX,
    p_hat_max: int = DEFAULT_P_HAT_MAX,
) -> SynthesisResult:
    """Full pipeline: enumerate, solve the cover exactly, annotate, name, lint."""
    subgraph = graph.restricted_to(node_set)
    path_set = enumerate_paths(subgraph, n_min)
    problem = CoverProblem(
        paths=path_set.paths,
        node_set=tuple(sorted(subgraph.nodes)),
        p_max=p_max,
        p_hat_max=p_hat_max,
    )
    solution = solve_cover(problem)
    selected_paths = [path_set[w] for w in solution.selected]
    sequences = annotate_requirements(selected_paths, subgraph, p_hat_max)
    sequences = [
        MovementSequence(s.sequence_id, s.steps, name_sequence(s)) for s in sequences
    ]
    warnings = lint_sequences(sequences)
    return SynthesisResult(
        path_set=path_set,
        solution=solution,
        sequences=tuple(sequences),
        warnings=tuple(warnings),
    )


def sequences_to_csv(sequences: Iterable[MovementSequence]) -> str:
    """CSV rows: sequence_id, trivial_name, space-joined id:level tokens."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["sequence_id", "trivial_name", "steps"])
    for sequence in sequences:
        tokens = " ".join(f"{cap}:{level}" for cap, level in sequence.steps)
        writer.writerow([sequence.sequence_id, sequence.trivial_name, tokens])
    return buffer.getvalue()


_SHADES = {1: ".", 2: ":", 3: "-", 4: "=", 5: "#", 6: "@"}


def sequences_to_text(sequences: Iterable[MovementSequence]) -> str:
    """Human-readable table; the level shows as a light-to-dark shade mark."""
    lines = ["id  name                      sequence (level shade: 1=. 2=: 3=- 4== 5=# 6=@)"]
    for sequence in sequences:
        cells = " ".join(f"{_SHADES[level]}{cap}" for cap, level in sequence.steps)
        lines.append(f"{sequence.sequence_id:<3d} {sequence.trivial_name:<25s} {cells}")
    return "\n".join(lines) + "\n"
