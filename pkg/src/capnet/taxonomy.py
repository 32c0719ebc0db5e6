"""Capability identifiers, the 7-step quantification scale, and the catalog.

Capabilities are identified hierarchically as complex.main.detail
(e.g. "3.04.08"); the detail component is omitted for main-level entries
(e.g. "4.01"). Quantifications live on the integer scale 0..6, where the
raw scale labels are 0,1,2,3-,3+,4,5 (3- and 3+ are stored as 3 and 4 so
that arithmetic on scores stays plain integer arithmetic).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Iterable, Iterator

from .errors import CapabilityIdError, CatalogError, QuantificationError

__all__ = [
    "CapabilityId",
    "Quantification",
    "QUANT_MIN",
    "QUANT_MAX",
    "QUANT_LABELS",
    "quantification_label",
    "Category",
    "Posture",
    "Laterality",
    "CatalogEntry",
    "CapabilityCatalog",
    "parse_capability_id",
    "sitting_over_table_set",
    "load_default_catalog",
]


@dataclass(frozen=True, order=False)
class CapabilityId:
    """Hierarchical capability identifier: complex.main[.detail]."""

    complex: int
    main: int
    detail: int | None = None

    def __post_init__(self):
        for part, value in (("complex", self.complex), ("main", self.main)):
            if not isinstance(value, int) or value <= 0:
                raise CapabilityIdError(f"{part} component must be a positive integer, got {value!r}")
        if self.detail is not None and (not isinstance(self.detail, int) or self.detail <= 0):
            raise CapabilityIdError(f"detail component must be a positive integer, got {self.detail!r}")

    @property
    def is_main_level(self) -> bool:
        return self.detail is None

    def main_id(self) -> "CapabilityId":
        """The main-level id this capability aggregates under."""
        return CapabilityId(self.complex, self.main)

    def sort_key(self) -> tuple[int, int, int, int]:
        # detail-absent entries order before their details
        return (self.complex, self.main, 0 if self.detail is None else 1, self.detail or 0)

    def __lt__(self, other: "CapabilityId") -> bool:
        return self.sort_key() < other.sort_key()

    def __le__(self, other: "CapabilityId") -> bool:
        return self.sort_key() <= other.sort_key()

    def __gt__(self, other: "CapabilityId") -> bool:
        return self.sort_key() > other.sort_key()

    def __ge__(self, other: "CapabilityId") -> bool:
        return self.sort_key() >= other.sort_key()

    def __str__(self) -> str:
        if self.detail is None:
            return f"{self.complex}.{self.main:02d}"
        return f"{self.complex}.{self.main:02d}.{self.detail:02d}"

    def __repr__(self) -> str:
        return f"CapabilityId({str(self)!r})"


def parse_capability_id(text: str) -> CapabilityId:
    """Parse dotted-decimal capability id text into its structured form.

    Accepts unpadded components ("3.4.8") and renders back zero-padded
    ("3.04.08"). Raises CapabilityIdError naming the offending component.
    """
    if not isinstance(text, str):
        raise CapabilityIdError(f"expected string, got {type(text).__name__}")
    parts = text.strip().split(".")
    if len(parts) > 3:
        raise CapabilityIdError(f"{text!r}: more than 3 components")
    if len(parts) < 2:
        raise CapabilityIdError(f"{text!r}: need at least complex.main")
    names = ("complex", "main", "detail")
    values = []
    for name, part in zip(names, parts):
        if part == "":
            raise CapabilityIdError(f"{text!r}: empty {name} component")
        if not part.isdigit():
            raise CapabilityIdError(f"{text!r}: non-numeric {name} component {part!r}")
        values.append(int(part))
    if any(v <= 0 for v in values):
        bad = names[[v <= 0 for v in values].index(True)]
        raise CapabilityIdError(f"{text!r}: zero-valued {bad} component")
    if len(values) == 2:
        return CapabilityId(values[0], values[1])
    return CapabilityId(values[0], values[1], values[2])


QUANT_MIN = 0
QUANT_MAX = 6
QUANT_LABELS = ("0", "1", "2", "3-", "3+", "4", "5")


@dataclass(frozen=True, order=True)
class Quantification:
    """One score on the 7-step scale, stored as an integer 0..6."""

    value: int

    def __post_init__(self):
        if not isinstance(self.value, int) or isinstance(self.value, bool):
            raise QuantificationError(f"quantification must be an integer, got {self.value!r}")
        if not QUANT_MIN <= self.value <= QUANT_MAX:
            raise QuantificationError(
                f"quantification {self.value} outside scale [{QUANT_MIN}, {QUANT_MAX}]"
            )

    @property
    def label(self) -> str:
        return QUANT_LABELS[self.value]

    def __int__(self) -> int:
        return self.value


def quantification_label(value: int) -> str:
    """Raw scale label for a stored score (3 -> "3-", 4 -> "3+", 6 -> "5")."""
    return Quantification(value).label


class Category(str, Enum):
    UPSTREAM = "upstream"
    OVER_TABLE = "over_table"


class Posture(str, Enum):
    SITTING = "sitting"
    STANDING = "standing"
    BOTH = "both"


class Laterality(str, Enum):
    UNILATERAL = "unilateral"
    BILATERAL = "bilateral"
    NA = "n/a"


@dataclass(frozen=True)
class CatalogEntry:
    id: CapabilityId
    name: str
    category: Category
    posture: Posture
    laterality: Laterality


class CapabilityCatalog:
    """Immutable set of catalog entries keyed by capability id."""

    def __init__(self, entries: Iterable[CatalogEntry]):
        self._entries: dict[CapabilityId, CatalogEntry] = {}
        for entry in entries:
            if entry.id in self._entries:
                raise CatalogError(f"duplicate catalog id {entry.id}")
            self._entries[entry.id] = entry
        self._order = tuple(sorted(self._entries))

    def __contains__(self, cap_id: CapabilityId) -> bool:
        return cap_id in self._entries

    def __iter__(self) -> Iterator[CatalogEntry]:
        for cap_id in self._order:
            yield self._entries[cap_id]

    def __len__(self) -> int:
        return len(self._entries)

    def __getitem__(self, cap_id: CapabilityId) -> CatalogEntry:
        try:
            return self._entries[cap_id]
        except KeyError:
            raise CatalogError(f"unknown capability id {cap_id}") from None

    def ids(self) -> tuple[CapabilityId, ...]:
        return self._order

    def name_of(self, cap_id: CapabilityId) -> str:
        return self[cap_id].name

    def knows_value_id(self, cap_id: CapabilityId) -> bool:
        """True for catalog ids and for main-level aggregates of catalog details.

        Profiles may carry propagated main-level scores (e.g. 3.04) even when
        the catalog only lists the details of that main capability.
        """
        if cap_id in self._entries:
            return True
        if cap_id.is_main_level:
            return any(e.main_id() == cap_id for e in self._entries)
        return False


def sitting_over_table_set(catalog: CapabilityCatalog) -> list[CapabilityId]:
    """Over-table capabilities assessable in sitting posture, canonical order.

    Standing-only entries are removed; entries applicable to both postures
    are kept.
    """
    return [
        entry.id
        for entry in catalog
        if entry.category is Category.OVER_TABLE and entry.posture is not Posture.STANDING
    ]


_CATALOG_COLUMNS = ("id", "name", "category", "posture", "laterality")


def read_catalog(lines: Iterable[str]) -> CapabilityCatalog:
    """Read a catalog from CSV lines (header row required)."""
    reader = csv.DictReader(lines)
    if reader.fieldnames is None or tuple(reader.fieldnames) != _CATALOG_COLUMNS:
        raise CatalogError(f"catalog header must be {','.join(_CATALOG_COLUMNS)}")
    entries = []
    for row in reader:
        try:
            entries.append(
                CatalogEntry(
                    id=parse_capability_id(row["id"]),
                    name=row["name"].strip(),
                    category=Category(row["category"].strip()),
                    posture=Posture(row["posture"].strip()),
                    laterality=Laterality(row["laterality"].strip()),
                )
            )
        except ValueError as exc:
            raise CatalogError(f"bad catalog row {row!r}: {exc}") from exc
    return CapabilityCatalog(entries)


def load_catalog(path) -> CapabilityCatalog:
    with open(path, newline="", encoding="utf-8") as handle:
        return read_catalog(handle)


def load_default_catalog() -> CapabilityCatalog:
    """The shipped stationary-manufacturing workstation catalog."""
    text = resources.files("capnet.fixtures").joinpath("capabilities.csv").read_text("utf-8")
    return read_catalog(text.splitlines())
