"""Capability profiles, requirement sets, datasets, and synthetic data.

A profile maps capability ids to an agent's quantified capacities; a
requirement set maps capability ids to the demands of one action. Dataset
files are CSV: columns ``agent_id, phase`` followed by one column per
capability id in canonical order; an empty cell means "not assessed".
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DatasetError, IncompleteProfileError
from .taxonomy import (
    CapabilityCatalog,
    CapabilityId,
    Quantification,
    parse_capability_id,
)

__all__ = [
    "Phase",
    "Profile",
    "RequirementSet",
    "ProfileDataset",
    "GeneratorConfig",
    "propagate_main_level",
    "profile_std",
    "filter_profiles",
    "generate_synthetic_profiles",
]


class Phase(str, Enum):
    PRE_REHAB = "pre_rehab"
    POST_REHAB = "post_rehab"
    UNSPECIFIED = "unspecified"


def _validated_values(values) -> dict[CapabilityId, int]:
    out = {}
    for cap_id, value in values.items():
        out[cap_id] = Quantification(int(value)).value
    return out


@dataclass(frozen=True)
class Profile:
    """One agent's assessed capacities. Missing ids mean "not assessed"."""

    agent_id: str
    phase: Phase = Phase.UNSPECIFIED
    values: dict[CapabilityId, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values", _validated_values(self.values))

    def value(self, cap_id: CapabilityId) -> int | None:
        return self.values.get(cap_id)

    def complete_over(self, capability_set: Iterable[CapabilityId]) -> bool:
        return all(cap in self.values for cap in capability_set)

    def missing_from(self, capability_set: Iterable[CapabilityId]) -> list[CapabilityId]:
        return sorted(cap for cap in capability_set if cap not in self.values)

    def validate_against(self, catalog: CapabilityCatalog) -> None:
        unknown = sorted(cap for cap in self.values if not catalog.knows_value_id(cap))
        if unknown:
            ids = ", ".join(str(u) for u in unknown)
            raise DatasetError(f"profile {self.agent_id}: unknown capability ids {ids}")


@dataclass(frozen=True)
class RequirementSet:
    """Quantified demands of one action over a subset of capabilities."""

    action_id: str
    requirements: dict[CapabilityId, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "requirements", _validated_values(self.requirements))

    def ids(self) -> list[CapabilityId]:
        return sorted(self.requirements)

    def total(self) -> int:
        return sum(self.requirements.values())

    def validate_against(self, catalog: CapabilityCatalog) -> None:
        unknown = sorted(cap for cap in self.requirements if not catalog.knows_value_id(cap))
        if unknown:
            ids = ", ".join(str(u) for u in unknown)
            raise DatasetError(f"requirements {self.action_id}: unknown capability ids {ids}")


class ProfileDataset:
    """Ordered collection of profiles with unique (agent_id, phase) keys."""

    def __init__(self, profiles: Iterable[Profile], provenance: str = ""):
        self.profiles = tuple(profiles)
        self.provenance = provenance
        seen = set()
        for profile in self.profiles:
            key = (profile.agent_id, profile.phase)
            if key in seen:
                raise DatasetError(f"duplicate agent/phase pair {key}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.profiles)

    def __iter__(self):
        return iter(self.profiles)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ProfileDataset)
            and self.profiles == other.profiles
            and self.provenance == other.provenance
        )

    def with_phase(self, phase: Phase) -> "ProfileDataset":
        return ProfileDataset(
            (p for p in self.profiles if p.phase is phase), provenance=self.provenance
        )

    def select(self, agent_id: str, phase: Phase | None = None) -> Profile:
        for profile in self.profiles:
            if profile.agent_id == agent_id and (phase is None or profile.phase is phase):
                return profile
        raise DatasetError(f"no profile for agent {agent_id!r}" + (f" phase {phase.value}" if phase else ""))


def propagate_main_level(profile: Profile, catalog: CapabilityCatalog | None = None) -> Profile:
    """Extend a profile with main-level scores.

    The score of a main-level capability is the minimum over its assessed
    details. Detail entries are preserved; an already assessed main-level
    entry is never overwritten, which makes the operation idempotent.
    """
    if catalog is not None:
        profile.validate_against(catalog)
    groups: dict[CapabilityId, list[int]] = {}
    for cap_id, value in profile.values.items():
        if cap_id.is_main_level:
            continue
        groups.setdefault(cap_id.main_id(), []).append(value)
    extended = dict(profile.values)
    for main_id, values in groups.items():
        if main_id not in extended:
            extended[main_id] = min(values)
    return replace(profile, values=extended)


def profile_std(profile: Profile, capability_set: Sequence[CapabilityId]) -> float:
    """Population standard deviation of the profile over the evaluation set.

    This is the dispersion statistic used by filter_profiles. Raises
    IncompleteProfileError listing missing ids.
    """
    missing = profile.missing_from(capability_set)
    if missing:
        raise IncompleteProfileError(missing)
    data = np.array([profile.values[cap] for cap in capability_set], dtype=float)
    return float(np.sqrt(np.mean((data - data.mean()) ** 2)))


def filter_profiles(
    dataset: ProfileDataset,
    capability_set: Sequence[CapabilityId],
    threshold: float = 0.2,
) -> ProfileDataset:
    """Keep profiles complete over the set whose dispersion >= threshold.

    Near-constant profiles (therapists scoring everything the same) and
    incomplete profiles are dropped; input order is preserved.
    """
    if threshold < 0:
        raise ConfigError(f"threshold must be non-negative, got {threshold}")
    kept = []
    for profile in dataset:
        if not profile.complete_over(capability_set):
            continue
        if profile_std(profile, capability_set) >= threshold:
            kept.append(profile)
    return ProfileDataset(kept, provenance=dataset.provenance)


# -- synthetic generation ---------------------------------------------------


@dataclass(frozen=True)
class GeneratorConfig:
    """Synthetic profile generator settings.

    Each agent yields a pre/post rehabilitation pair. Detail scores are a
    blend of a per-main-capability latent level and independent noise, so
    details of one main capability correlate with strength
    ``within_main_correlation`` while capabilities of different complexes
    stay uncorrelated. Scores center on the middle of the scale (profiles
    are assumed roughly normal around 3 and 4). A ``degenerate_fraction``
    of profiles is emitted constant or with holes, mimicking real-world
    assessment shortcuts that the filter stage must remove.
    """

    ids: tuple[CapabilityId, ...]
    agents: int = 500
    base_mean: float = 3.6
    base_sd: float = 1.1
    within_main_correlation: float = 0.8
    degenerate_fraction: float = 0.15
    post_improvement: float = 0.4

    def __post_init__(self):
        if self.agents < 0:
            raise ConfigError(f"agents must be >= 0, got {self.agents}")
        if not 0.0 <= self.within_main_correlation <= 1.0:
            raise ConfigError(
                f"within_main_correlation must be in [0, 1], got {self.within_main_correlation}"
            )
        if not 0.0 <= self.degenerate_fraction <= 1.0:
            raise ConfigError(
                f"degenerate_fraction must be in [0, 1], got {self.degenerate_fraction}"
            )
        if self.base_sd < 0:
            raise ConfigError(f"base_sd must be >= 0, got {self.base_sd}")
        if not self.ids:
            raise ConfigError("ids must not be empty")


def generate_synthetic_profiles(config: GeneratorConfig, seed: int) -> ProfileDataset:
    """Deterministic synthetic dataset of pre/post profile pairs."""
    rng = np.random.default_rng(seed)
    ids = sorted(config.ids)
    mains = sorted({cap.main_id() for cap in ids})
    main_index = {m: i for i, m in enumerate(mains)}
    rho = config.within_main_correlation
    latent_w = math.sqrt(rho)
    noise_w = math.sqrt(1.0 - rho)

    profiles = []
    for agent in range(config.agents):
        agent_id = f"A{agent:05d}"
        latents = rng.normal(0.0, 1.0, size=len(mains))
        noise = rng.normal(0.0, 1.0, size=len(ids))
        raw = np.array(
            [
                config.base_mean
                + config.base_sd * (latent_w * latents[main_index[cap.main_id()]] + noise_w * noise[k])
                for k, cap in enumerate(ids)
            ]
        )
        improvement = np.abs(rng.normal(config.post_improvement, 0.3, size=len(ids)))
        degenerate_draw = rng.uniform()
        degenerate_kind = int(rng.integers(0, 2))
        hole_mask = rng.uniform(size=len(ids)) < 0.4
        constant_value = int(rng.integers(3, 5))

        for phase, scores in (
            (Phase.PRE_REHAB, raw),
            (Phase.POST_REHAB, raw + improvement),
        ):
            values = {
                cap: int(np.clip(np.rint(score), 0, 6))
                for cap, score in zip(ids, scores)
            }
            if degenerate_draw < config.degenerate_fraction:
                if degenerate_kind == 0:
                    values = {cap: constant_value for cap in ids}
                else:
                    values = {cap: v for (cap, v), hole in zip(values.items(), hole_mask) if not hole}
                    if len(values) == len(ids):
                        values.pop(ids[0])
            profiles.append(Profile(agent_id=agent_id, phase=phase, values=values))
    return ProfileDataset(profiles, provenance=f"synthetic seed={seed} agents={config.agents}")


# -- dataset file format -----------------------------------------------------


def write_dataset(dataset: ProfileDataset, ids: Sequence[CapabilityId]) -> str:
    """Render a dataset to CSV text (one row per profile)."""
    ids = sorted(ids)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["agent_id", "phase"] + [str(cap) for cap in ids])
    for profile in dataset:
        row = [profile.agent_id, profile.phase.value]
        for cap in ids:
            value = profile.values.get(cap)
            row.append("" if value is None else str(value))
        writer.writerow(row)
    return buffer.getvalue()


def read_dataset(lines: Iterable[str], catalog: CapabilityCatalog | None = None) -> ProfileDataset:
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetError("empty dataset file") from None
    if header[:2] != ["agent_id", "phase"]:
        raise DatasetError("dataset header must start with agent_id,phase")
    try:
        ids = [parse_capability_id(text) for text in header[2:]]
    except Exception as exc:
        raise DatasetError(f"bad capability id in header: {exc}") from exc
    profiles = []
    for row in reader:
        if not row:
            continue
        if len(row) != len(ids) + 2:
            raise DatasetError(f"row for agent {row[0]!r} has {len(row)} cells, expected {len(ids) + 2}")
        try:
            phase = Phase(row[1])
        except ValueError:
            raise DatasetError(f"unknown phase {row[1]!r} for agent {row[0]!r}") from None
        values = {
            cap: int(cell) for cap, cell in zip(ids, row[2:]) if cell != ""
        }
        profile = Profile(agent_id=row[0], phase=phase, values=values)
        if catalog is not None:
            profile.validate_against(catalog)
        profiles.append(profile)
    return ProfileDataset(profiles)


def load_dataset(path, catalog: CapabilityCatalog | None = None) -> ProfileDataset:
    with open(path, newline="", encoding="utf-8") as handle:
        return read_dataset(handle, catalog)
