"""Capability deltas, fuzzy feasibility, and delta-compensation allocation.

A delta is requirement minus capacity per capability: positive values are
deficits, negative values usable reserves. An agent can take an action if
every delta stays within its per-capability slack and the summed deficit
stays within the aggregate slack. When the test fails, requirement units
are shifted from deficient capabilities to conjugated capabilities with
reserves, one unit at a time, until the test holds or no shift sequence
can make it hold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .errors import ConfigError, IncompleteProfileError
from .network import ConjugationGraph
from .profiles import Profile, RequirementSet
from .taxonomy import QUANT_MAX, QUANT_MIN, CapabilityId

__all__ = [
    "DeltaSet",
    "FuzzyParams",
    "FeasibilityReport",
    "CompensationOutcome",
    "CompensationStep",
    "CompensationTrace",
    "compute_delta",
    "deficit_sum",
    "is_feasible_fuzzy",
    "compensate",
]


@dataclass(frozen=True)
class DeltaSet:
    """Per-capability requirement-minus-capacity values for one pairing."""

    action_id: str
    agent_id: str
    deltas: dict[CapabilityId, int] = field(default_factory=dict)

    def ids(self) -> list[CapabilityId]:
        return sorted(self.deltas)

    def deficits(self) -> dict[CapabilityId, int]:
        return {cap: d for cap, d in self.deltas.items() if d > 0}

    def reserves(self) -> dict[CapabilityId, int]:
        return {cap: d for cap, d in self.deltas.items() if d < 0}


def compute_delta(requirements: RequirementSet, profile: Profile) -> DeltaSet:
    """Elementwise requirement minus capacity over the requirement ids."""
    missing = profile.missing_from(requirements.ids())
    if missing:
        raise IncompleteProfileError(missing)
    deltas = {
        cap: req - profile.values[cap]
        for cap, req in requirements.requirements.items()
    }
    return DeltaSet(action_id=requirements.action_id, agent_id=profile.agent_id, deltas=deltas)


def deficit_sum(deltas: DeltaSet) -> int:
    """Sum of positive deltas; reserves never offset deficits here."""
    return sum(d for d in deltas.deltas.values() if d > 0)


@dataclass(frozen=True)
class FuzzyParams:
    """Per-capability slack (xi) and aggregate deficit slack (theta).

    A missing xi entry defaults to zero slack. Each xi value is capped by
    the top of the quantification scale; theta is capped at use time by
    the requirement-set size times the scale maximum.
    """

    xi: dict[CapabilityId, int] = field(default_factory=dict)
    theta: int = 0

    def __post_init__(self):
        for cap, slack in self.xi.items():
            if not 0 <= slack <= QUANT_MAX:
                raise ConfigError(f"xi[{cap}] = {slack} outside [0, {QUANT_MAX}]")
        if self.theta < 0:
            raise ConfigError(f"theta must be >= 0, got {self.theta}")

    def xi_for(self, cap: CapabilityId) -> int:
        return self.xi.get(cap, 0)


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the two fuzzy clauses with every violated clause named."""

    feasible: bool
    per_capability_violations: tuple[tuple[CapabilityId, int, int], ...]  # (id, delta, xi)
    aggregate_violation: tuple[int, int] | None  # (deficit sum, theta)

    def __bool__(self) -> bool:
        return self.feasible

    def describe(self) -> list[str]:
        lines = []
        for cap, delta, xi in self.per_capability_violations:
            lines.append(f"per-capability clause violated at {cap}: delta {delta} > xi {xi}")
        if self.aggregate_violation is not None:
            total, theta = self.aggregate_violation
            lines.append(f"aggregate clause violated: deficit sum {total} > theta {theta}")
        return lines


def is_feasible_fuzzy(deltas: DeltaSet, fuzz: FuzzyParams) -> FeasibilityReport:
    """Test both fuzzy clauses: delta_j <= xi_j for all j, and deficit sum <= theta."""
    max_theta = len(deltas.deltas) * QUANT_MAX
    if fuzz.theta > max_theta:
        raise ConfigError(f"theta {fuzz.theta} exceeds requirement-set cap {max_theta}")
    violations = tuple(
        (cap, delta, fuzz.xi_for(cap))
        for cap, delta in sorted(deltas.deltas.items())
        if delta > fuzz.xi_for(cap)
    )
    total = deficit_sum(deltas)
    aggregate = (total, fuzz.theta) if total > fuzz.theta else None
    return FeasibilityReport(
        feasible=not violations and aggregate is None,
        per_capability_violations=violations,
        aggregate_violation=aggregate,
    )


class CompensationOutcome(str, Enum):
    FEASIBLE_DIRECT = "feasible_direct"
    FEASIBLE_AFTER_COMPENSATION = "feasible_after_compensation"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class CompensationStep:
    deficient: CapabilityId
    reserve: CapabilityId
    amount: int


@dataclass(frozen=True)
class CompensationTrace:
    outcome: CompensationOutcome
    steps: tuple[CompensationStep, ...]
    initial_requirements: RequirementSet
    final_requirements: RequirementSet
    final_report: FeasibilityReport

    def text_report(self) -> str:
        lines = [f"outcome: {self.outcome.value}"]
        for step in self.steps:
            lines.append(f"shift {step.amount} from {step.deficient} to {step.reserve}")
        if self.outcome is CompensationOutcome.INFEASIBLE:
            lines.extend(self.final_report.describe())
        return "\n".join(lines) + "\n"

    def to_document(self) -> str:
        doc = {
            "outcome": self.outcome.value,
            "steps": [
                {"deficient": str(s.deficient), "reserve": str(s.reserve), "amount": s.amount}
                for s in self.steps
            ],
            "initial_requirements": {
                str(cap): value for cap, value in sorted(self.initial_requirements.requirements.items())
            },
            "final_requirements": {
                str(cap): value for cap, value in sorted(self.final_requirements.requirements.items())
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _admissible_shifts(
    requirements: dict[CapabilityId, int],
    profile: Profile,
    neighbors: dict[CapabilityId, set[CapabilityId]],
    fuzz: FuzzyParams,
) -> list[tuple[CapabilityId, CapabilityId]]:
    """Candidate (deficient, reserve) unit shifts, in deterministic order.

    A shift lowers the deficient requirement by one and raises the reserve
    requirement by one. Admissible when the deficient delta is positive,
    the reserve delta negative, the pair is conjugated, the moved unit
    stays on the scale, and the receiving capability does not acquire a
    per-capability violation.
    """
    deltas = {cap: req - profile.values[cap] for cap, req in requirements.items()}
    deficits = [(cap, d) for cap, d in deltas.items() if d > 0 and requirements[cap] > QUANT_MIN]
    reserves = [cap for cap, d in deltas.items() if d < 0 and requirements[cap] < QUANT_MAX]
    deficits.sort(key=lambda item: (-item[1], item[0].sort_key()))
    out = []
    for deficient, _ in deficits:
        for reserve in sorted(reserves):
            if reserve not in neighbors.get(deficient, ()):
                continue
            if deltas[reserve] + 1 > fuzz.xi_for(reserve):
                continue
            out.append((deficient, reserve))
    return out


def compensate(
    requirements: RequirementSet,
    profile: Profile,
    graph: ConjugationGraph,
    fuzz: FuzzyParams,
) -> CompensationTrace:
    """Delta-compensation allocation over a conjugation graph.

    Computes deltas, tests the fuzzy clauses, and while infeasible shifts
    one requirement unit from a deficient capability to a conjugated
    capability with usable reserve, re-testing after every shift. The
    candidate order is largest deficit first, ties by canonical id of the
    deficient then the reserve capability; dead ends backtrack, so the
    verdict is infeasible exactly when no unit-shift sequence reaches a
    feasible state. Shifts are confined to capabilities carrying an
    explicit requirement, and conjugation works in either direction of the
    stored edge orientation.
    """
    missing = profile.missing_from(requirements.ids())
    if missing:
        raise IncompleteProfileError(missing)

    neighbors: dict[CapabilityId, set[CapabilityId]] = {}
    req_ids = set(requirements.requirements)
    for edge in graph.edges:
        if edge.source in req_ids and edge.target in req_ids:
            neighbors.setdefault(edge.source, set()).add(edge.target)
            neighbors.setdefault(edge.target, set()).add(edge.source)

    initial = dict(requirements.requirements)

    def report_for(reqs: dict[CapabilityId, int]) -> FeasibilityReport:
        delta_set = DeltaSet(
            action_id=requirements.action_id,
            agent_id=profile.agent_id,
            deltas={cap: req - profile.values[cap] for cap, req in reqs.items()},
        )
        return is_feasible_fuzzy(delta_set, fuzz)

    # Depth-first search over unit shifts; memoized on requirement state.
    # Every accepted shift lowers the deficit sum by one, so depth is
    # bounded by the initial deficit sum.
    seen: set[tuple[int, ...]] = set()
    order = sorted(initial)

    def search(reqs: dict[CapabilityId, int]) -> list[CompensationStep] | None:
        state = tuple(reqs[cap] for cap in order)
        if state in seen:
            return None
        seen.add(state)
        if report_for(reqs):
            return []
        for deficient, reserve in _admissible_shifts(reqs, profile, neighbors, fuzz):
            reqs[deficient] -= 1
            reqs[reserve] += 1
            tail = search(reqs)
            if tail is not None:
                return [CompensationStep(deficient, reserve, 1)] + tail
            reqs[deficient] += 1
            reqs[reserve] -= 1
        return None

    working = dict(initial)
    steps = search(working)

    if steps is None:
        final = RequirementSet(requirements.action_id, initial)
        return CompensationTrace(
            outcome=CompensationOutcome.INFEASIBLE,
            steps=(),
            initial_requirements=requirements,
            final_requirements=final,
            final_report=report_for(initial),
        )

    merged = _merge_steps(steps)
    final_reqs = dict(initial)
    for step in merged:
        final_reqs[step.deficient] -= step.amount
        final_reqs[step.reserve] += step.amount
    final = RequirementSet(requirements.action_id, final_reqs)
    outcome = (
        CompensationOutcome.FEASIBLE_DIRECT
        if not merged
        else CompensationOutcome.FEASIBLE_AFTER_COMPENSATION
    )
    return CompensationTrace(
        outcome=outcome,
        steps=tuple(merged),
        initial_requirements=requirements,
        final_requirements=final,
        final_report=report_for(final_reqs),
    )


def _merge_steps(steps: Iterable[CompensationStep]) -> list[CompensationStep]:
    """Coalesce consecutive shifts along the same pair."""
    merged: list[CompensationStep] = []
    for step in steps:
        if merged and merged[-1].deficient == step.deficient and merged[-1].reserve == step.reserve:
            last = merged[-1]
            merged[-1] = CompensationStep(last.deficient, last.reserve, last.amount + step.amount)
        else:
            merged.append(step)
    return merged
