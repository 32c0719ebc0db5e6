"""Directed conjugated-capability graph: build, prune, augment, export.

The interrelation table is a list of (row, column, relation) entries read
row-to-column. Orientation rules applied when building the graph:

* ``condition_for`` (c):  edge row -> column
* ``depends_on`` (d):     edge column -> row (converse of c)
* ``appears_with`` (a) and ``replaced_by`` (r): symmetric relations,
  oriented from the canonically smaller to the canonically larger id

Duplicate entries for the same capability pair are merged; condition or
dependency entries take precedence over appears_with, which takes
precedence over replaced_by. Symmetric edges that would close a cycle
against the already oriented edges are dropped and reported, keeping the
graph acyclic by construction.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Iterable, Mapping

from .errors import (
    CatalogError,
    GraphConstructionError,
    MissingCorrelationError,
)
from .taxonomy import (
    CapabilityCatalog,
    CapabilityId,
    Category,
    parse_capability_id,
)

__all__ = [
    "RelationKind",
    "Relation",
    "InterrelationEntry",
    "InterrelationTable",
    "Edge",
    "ConjugationGraph",
    "CandidateVerdict",
    "StrongCandidate",
    "StrongCandidateTable",
    "EdgeCorrelations",
    "build_graph",
    "prune_weak",
    "augment_strong",
    "export_graph",
    "import_graph",
    "load_default_interrelations",
    "load_default_candidates",
    "load_default_correlations",
]


class RelationKind(str, Enum):
    DEPENDS_ON = "d"
    CONDITION_FOR = "c"
    APPEARS_WITH = "a"
    REPLACED_BY = "r"


@dataclass(frozen=True)
class Relation:
    kind: RelationKind
    manufacturing: bool = False

    def letter(self) -> str:
        return self.kind.value + ("(M)" if self.manufacturing else "")


@dataclass(frozen=True)
class InterrelationEntry:
    row: CapabilityId
    col: CapabilityId
    relation: Relation

    def __post_init__(self):
        if self.row == self.col:
            raise GraphConstructionError(f"self interrelation on {self.row}")


class InterrelationTable:
    """Pairwise interrelation entries, read row-to-column."""

    def __init__(self, entries: Iterable[InterrelationEntry]):
        self.entries = tuple(entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def validate_against(self, catalog: CapabilityCatalog) -> None:
        for entry in self.entries:
            for cap_id in (entry.row, entry.col):
                if cap_id not in catalog:
                    raise CatalogError(f"interrelation references unknown id {cap_id}")


@dataclass(frozen=True)
class Edge:
    source: CapabilityId
    target: CapabilityId
    relation: Relation
    correlation: float | None = None

    def __post_init__(self):
        if self.correlation is not None and abs(self.correlation) > 1.0:
            raise GraphConstructionError(
                f"edge {self.source}->{self.target} correlation {self.correlation} outside [-1, 1]"
            )

    def pair(self) -> frozenset[CapabilityId]:
        return frozenset((self.source, self.target))


@dataclass(frozen=True)
class ConjugationGraph:
    """Immutable directed acyclic graph of conjugated capabilities.

    Nodes carry the catalog category tag so downstream stages can filter
    out upstream-tested capabilities. Equality covers nodes and edges but
    not build metadata (dropped_edges).
    """

    nodes: tuple[CapabilityId, ...]
    edges: tuple[Edge, ...]
    categories: tuple[tuple[CapabilityId, str], ...] = ()
    dropped_edges: tuple[Edge, ...] = field(default=(), compare=False)

    def __post_init__(self):
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise GraphConstructionError("duplicate nodes")
        seen_pairs: set[tuple[CapabilityId, CapabilityId]] = set()
        for edge in self.edges:
            if edge.source not in node_set or edge.target not in node_set:
                raise GraphConstructionError(f"edge {edge.source}->{edge.target} uses unknown node")
            key = (edge.source, edge.target)
            rev = (edge.target, edge.source)
            if key in seen_pairs or rev in seen_pairs:
                raise GraphConstructionError(f"parallel edge on pair {edge.source}, {edge.target}")
            seen_pairs.add(key)
        cycle = find_cycle(self.nodes, [(e.source, e.target) for e in self.edges])
        if cycle is not None:
            pretty = " -> ".join(str(n) for n in cycle)
            raise GraphConstructionError(f"graph contains a cycle: {pretty}")

    # -- queries ---------------------------------------------------------

    def successors(self, node: CapabilityId) -> list[CapabilityId]:
        return sorted(e.target for e in self.edges if e.source == node)

    def predecessors(self, node: CapabilityId) -> list[CapabilityId]:
        return sorted(e.source for e in self.edges if e.target == node)

    def has_edge(self, a: CapabilityId, b: CapabilityId) -> bool:
        return any(e.source == a and e.target == b for e in self.edges)

    def are_conjugated(self, a: CapabilityId, b: CapabilityId) -> bool:
        """True when an edge joins a and b in either direction."""
        return self.has_edge(a, b) or self.has_edge(b, a)

    def edge_pairs(self) -> set[frozenset[CapabilityId]]:
        return {e.pair() for e in self.edges}

    def category_of(self, node: CapabilityId) -> str | None:
        return dict(self.categories).get(node)

    def over_table_nodes(self) -> list[CapabilityId]:
        tags = dict(self.categories)
        return sorted(n for n in self.nodes if tags.get(n) == Category.OVER_TABLE.value)

    def restricted_to(self, keep: Iterable[CapabilityId]) -> "ConjugationGraph":
        """Induced subgraph on the given nodes."""
        keep_set = set(keep)
        nodes = tuple(sorted(n for n in self.nodes if n in keep_set))
        edges = tuple(
            sorted(
                (e for e in self.edges if e.source in keep_set and e.target in keep_set),
                key=lambda e: (e.source.sort_key(), e.target.sort_key()),
            )
        )
        cats = tuple((n, c) for n, c in self.categories if n in keep_set)
        return ConjugationGraph(nodes=nodes, edges=edges, categories=cats)

    def replace_edges(self, edges: Iterable[Edge], dropped: Iterable[Edge] = ()) -> "ConjugationGraph":
        ordered = tuple(sorted(edges, key=lambda e: (e.source.sort_key(), e.target.sort_key())))
        return ConjugationGraph(
            nodes=self.nodes,
            edges=ordered,
            categories=self.categories,
            dropped_edges=tuple(dropped),
        )


def find_cycle(nodes, arcs) -> list | None:
    """Iterative DFS cycle finder; returns one cycle as a node list or None."""
    adjacency: dict = {n: [] for n in nodes}
    for source, target in arcs:
        adjacency[source].append(target)
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in nodes}
    parent: dict = {}
    for root in nodes:
        if color[root] != WHITE:
            continue
        stack = [(root, iter(adjacency[root]))]
        color[root] = GRAY
        while stack:
            node, children = stack[-1]
            advanced = False
            for child in children:
                if color[child] == WHITE:
                    color[child] = GRAY
                    parent[child] = node
                    stack.append((child, iter(adjacency[child])))
                    advanced = True
                    break
                if color[child] == GRAY:
                    cycle = [child, node]
                    walker = node
                    while walker != child:
                        walker = parent[walker]
                        cycle.append(walker)
                    cycle.reverse()
                    return cycle
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return None


def _reachable(adjacency: Mapping, start, goal) -> bool:
    stack = [start]
    seen = {start}
    while stack:
        node = stack.pop()
        if node == goal:
            return True
        for child in adjacency.get(node, ()):
            if child not in seen:
                seen.add(child)
                stack.append(child)
    return False


_RELATION_PRECEDENCE = {
    RelationKind.CONDITION_FOR: 0,
    RelationKind.DEPENDS_ON: 0,
    RelationKind.APPEARS_WITH: 1,
    RelationKind.REPLACED_BY: 2,
}


def build_graph(
    table: InterrelationTable,
    catalog: CapabilityCatalog | None = None,
) -> ConjugationGraph:
    """Orient an interrelation table into an acyclic conjugation graph.

    Raises GraphConstructionError when the condition/dependency entries are
    contradictory or cyclic. Symmetric edges dropped to preserve acyclicity
    are reported on the result's ``dropped_edges``.
    """
    if catalog is not None:
        table.validate_against(catalog)

    # Merge the two reading directions of each unordered pair.
    by_pair: dict[frozenset[CapabilityId], list[InterrelationEntry]] = {}
    for entry in table:
        by_pair.setdefault(frozenset((entry.row, entry.col)), []).append(entry)

    nodes = sorted({cap for entry in table for cap in (entry.row, entry.col)})
    directed: dict[tuple[CapabilityId, CapabilityId], Relation] = {}
    symmetric: dict[tuple[CapabilityId, CapabilityId], Relation] = {}

    for pair, entries in sorted(by_pair.items(), key=lambda kv: sorted(k.sort_key() for k in kv[0])):
        best = min(_RELATION_PRECEDENCE[e.relation.kind] for e in entries)
        chosen = [e for e in entries if _RELATION_PRECEDENCE[e.relation.kind] == best]
        manufacturing = any(e.relation.manufacturing for e in entries)
        if best == 0:
            # condition/dependency: orient from the condition to the dependent
            orientations = set()
            for e in chosen:
                if e.relation.kind is RelationKind.CONDITION_FOR:
                    orientations.add((e.row, e.col))
                else:
                    orientations.add((e.col, e.row))
            if len(orientations) != 1:
                a, b = sorted(pair)
                raise GraphConstructionError(
                    f"contradictory condition/dependency orientation on pair {a}, {b}"
                )
            (source, target) = orientations.pop()
            directed[(source, target)] = Relation(RelationKind.CONDITION_FOR, manufacturing)
        else:
            kind = chosen[0].relation.kind
            small, large = sorted(pair)
            symmetric[(small, large)] = Relation(kind, manufacturing)

    skeleton_cycle = find_cycle(nodes, list(directed))
    if skeleton_cycle is not None:
        pretty = " -> ".join(str(n) for n in skeleton_cycle)
        raise GraphConstructionError(f"condition/dependency entries form a cycle: {pretty}")

    adjacency: dict[CapabilityId, list[CapabilityId]] = {n: [] for n in nodes}
    for source, target in directed:
        adjacency[source].append(target)

    edges = [Edge(s, t, rel) for (s, t), rel in directed.items()]
    dropped: list[Edge] = []
    for (source, target), rel in sorted(symmetric.items(), key=lambda kv: (kv[0][0].sort_key(), kv[0][1].sort_key())):
        if _reachable(adjacency, target, source):
            dropped.append(Edge(source, target, rel))
            continue
        adjacency[source].append(target)
        edges.append(Edge(source, target, rel))

    categories = ()
    if catalog is not None:
        categories = tuple((n, catalog[n].category.value) for n in nodes)
    edges.sort(key=lambda e: (e.source.sort_key(), e.target.sort_key()))
    return ConjugationGraph(
        nodes=tuple(nodes),
        edges=tuple(edges),
        categories=categories,
        dropped_edges=tuple(dropped),
    )


class EdgeCorrelations:
    """Sparse pairwise correlation lookup (order-insensitive)."""

    def __init__(self, values: Mapping | Iterable[tuple[CapabilityId, CapabilityId, float]]):
        self._values: dict[frozenset[CapabilityId], float] = {}
        items = values.items() if isinstance(values, Mapping) else ((a, b, r) for a, b, r in values)
        if isinstance(values, Mapping):
            for (a, b), r in items:
                self._values[frozenset((a, b))] = float(r)
        else:
            for a, b, r in values:
                self._values[frozenset((a, b))] = float(r)

    def pair(self, a: CapabilityId, b: CapabilityId) -> float | None:
        return self._values.get(frozenset((a, b)))

    def __len__(self) -> int:
        return len(self._values)


def prune_weak(graph: ConjugationGraph, corr, threshold: float) -> ConjugationGraph:
    """Drop edges whose |r| is below the threshold; annotate survivors with r.

    ``corr`` is anything exposing ``pair(a, b) -> float | None`` (an
    EdgeCorrelations fixture or a computed CorrelationMatrix). A missing
    value for an edge endpoint pair is an error.
    """
    kept: list[Edge] = []
    for edge in graph.edges:
        r = corr.pair(edge.source, edge.target)
        if r is None:
            raise MissingCorrelationError(
                f"no correlation for edge pair {edge.source}, {edge.target}"
            )
        if abs(r) < threshold:
            continue
        kept.append(Edge(edge.source, edge.target, edge.relation, float(r)))
    return graph.replace_edges(kept)


class CandidateVerdict(str, Enum):
    NOT_IN_TABLE = "not_in_table"
    IMPOSSIBLE = "impossible"
    PRETEST = "pretest"
    SIMULTANEOUS_ROTATION = "simultaneous_rotation"
    REACH_COMBINATION = "reach_combination"
    PRESSURE_MOVEMENT = "pressure_movement"


@dataclass(frozen=True)
class StrongCandidate:
    c1: CapabilityId
    c2: CapabilityId
    r: float
    verdict: CandidateVerdict


class StrongCandidateTable:
    def __init__(self, entries: Iterable[StrongCandidate]):
        self.entries = tuple(entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def addable(self, repair: bool) -> list[StrongCandidate]:
        """Candidates eligible for augmentation.

        Pairs absent from the interrelation table and not excluded by a
        feasibility class are added when strongly correlated (|r| >= 0.8).
        The moderate reachability-repair pair is added only when requested.
        """
        out = []
        for cand in self.entries:
            if cand.verdict is not CandidateVerdict.NOT_IN_TABLE:
                continue
            if abs(cand.r) >= 0.8 or repair:
                out.append(cand)
        return out


def augment_strong(
    graph: ConjugationGraph,
    candidates: StrongCandidateTable,
    repair: bool = True,
) -> ConjugationGraph:
    """Add eligible strongly correlated pairs as canonical-order edges.

    Raises GraphConstructionError if an added edge would create a cycle.
    """
    adjacency: dict[CapabilityId, list[CapabilityId]] = {n: [] for n in graph.nodes}
    for edge in graph.edges:
        adjacency[edge.source].append(edge.target)

    edges = list(graph.edges)
    existing = graph.edge_pairs()
    for cand in candidates.addable(repair):
        pair = frozenset((cand.c1, cand.c2))
        if pair in existing:
            continue
        source, target = sorted((cand.c1, cand.c2))
        if source not in adjacency or target not in adjacency:
            raise CatalogError(f"candidate pair {cand.c1}, {cand.c2} not in graph nodes")
        if _reachable(adjacency, target, source):
            raise GraphConstructionError(
                f"augmenting {source}->{target} would create a cycle"
            )
        adjacency[source].append(target)
        edges.append(Edge(source, target, Relation(RelationKind.APPEARS_WITH), cand.r))
        existing.add(pair)
    return graph.replace_edges(edges, dropped=graph.dropped_edges)


# -- serialization --------------------------------------------------------


def export_graph(graph: ConjugationGraph, fmt: str = "structured", catalog: CapabilityCatalog | None = None) -> str:
    """Render the graph; ``structured`` (JSON, lossless) or ``dot``."""
    if fmt == "structured":
        doc = {
            "nodes": [
                {"id": str(n), "category": graph.category_of(n)}
                for n in sorted(graph.nodes)
            ],
            "edges": [
                {
                    "from": str(e.source),
                    "to": str(e.target),
                    "relation": e.relation.kind.value,
                    "manufacturing": e.relation.manufacturing,
                    "correlation": e.correlation,
                }
                for e in sorted(graph.edges, key=lambda e: (e.source.sort_key(), e.target.sort_key()))
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt == "dot":
        lines = ["digraph conjugated_capabilities {", "  rankdir=LR;"]
        for node in sorted(graph.nodes):
            label = str(node)
            if catalog is not None and node in catalog:
                label = f"{node} {catalog.name_of(node)}"
            lines.append(f'  "{node}" [label="{label}"];')
        for edge in sorted(graph.edges, key=lambda e: (e.source.sort_key(), e.target.sort_key())):
            attrs = [f'label="{edge.relation.letter()}"']
            if edge.correlation is not None:
                attrs.append(f'tooltip="r={edge.correlation:g}"')
            lines.append(f'  "{edge.source}" -> "{edge.target}" [{", ".join(attrs)}];')
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown export format {fmt!r}")


def import_graph(text: str) -> ConjugationGraph:
    """Rebuild a graph from its structured export."""
    doc = json.loads(text)
    nodes = tuple(sorted(parse_capability_id(n["id"]) for n in doc["nodes"]))
    categories = tuple(
        (parse_capability_id(n["id"]), n["category"])
        for n in doc["nodes"]
        if n.get("category") is not None
    )
    edges = tuple(
        Edge(
            parse_capability_id(e["from"]),
            parse_capability_id(e["to"]),
            Relation(RelationKind(e["relation"]), bool(e["manufacturing"])),
            e["correlation"],
        )
        for e in doc["edges"]
    )
    return ConjugationGraph(nodes=nodes, edges=edges, categories=categories)


# -- fixture loading -------------------------------------------------------


def read_interrelations(lines: Iterable[str]) -> InterrelationTable:
    reader = csv.DictReader(lines)
    expected = ("row_id", "col_id", "relation", "manufacturing")
    if reader.fieldnames is None or tuple(reader.fieldnames) != expected:
        raise GraphConstructionError(f"interrelation header must be {','.join(expected)}")
    entries = []
    for row in reader:
        entries.append(
            InterrelationEntry(
                row=parse_capability_id(row["row_id"]),
                col=parse_capability_id(row["col_id"]),
                relation=Relation(RelationKind(row["relation"].strip()), row["manufacturing"].strip() == "1"),
            )
        )
    return InterrelationTable(entries)


def read_candidates(lines: Iterable[str]) -> StrongCandidateTable:
    reader = csv.DictReader(lines)
    entries = [
        StrongCandidate(
            c1=parse_capability_id(row["c1"]),
            c2=parse_capability_id(row["c2"]),
            r=float(row["r"]),
            verdict=CandidateVerdict(row["verdict"].strip()),
        )
        for row in reader
    ]
    return StrongCandidateTable(entries)


def read_correlations(lines: Iterable[str]) -> EdgeCorrelations:
    reader = csv.DictReader(lines)
    return EdgeCorrelations(
        [
            (parse_capability_id(row["id1"]), parse_capability_id(row["id2"]), float(row["r"]))
            for row in reader
        ]
    )


def _fixture_text(name: str) -> str:
    return resources.files("capnet.fixtures").joinpath(name).read_text("utf-8")


def load_interrelations(path) -> InterrelationTable:
    with open(path, newline="", encoding="utf-8") as handle:
        return read_interrelations(handle)


def load_candidates(path) -> StrongCandidateTable:
    with open(path, newline="", encoding="utf-8") as handle:
        return read_candidates(handle)


def load_correlations(path) -> EdgeCorrelations:
    with open(path, newline="", encoding="utf-8") as handle:
        return read_correlations(handle)


def load_default_interrelations() -> InterrelationTable:
    return read_interrelations(_fixture_text("interrelations.csv").splitlines())


def load_default_candidates() -> StrongCandidateTable:
    return read_candidates(_fixture_text("strong_candidates.csv").splitlines())


def load_default_correlations() -> EdgeCorrelations:
    return read_correlations(_fixture_text("reference_correlations.csv").splitlines())
