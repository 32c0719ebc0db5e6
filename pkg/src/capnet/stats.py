"""Pearson correlation, Monte Carlo exact permutation tests, classification.

Determinism contract: every stochastic routine is a pure function of its
inputs and an explicit integer seed. The permutation test derives the
randomness of resample ``i`` from row ``i`` of a single counter-based
(Philox) stream keyed by the seed, and evaluates statistics with plain
einsum reductions, so results are bit-identical across runs and across
BLAS/OpenMP thread settings.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DatasetError, UndefinedCorrelationError
from .profiles import ProfileDataset
from .taxonomy import CapabilityId

__all__ = [
    "CorrelationMatrix",
    "PermutationTestResult",
    "CorrelationStrength",
    "pearson",
    "correlation_matrix",
    "permutation_test",
    "pairwise_permutation_pvalues",
    "classify_correlation",
]


def _as_vector(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"expected 1-d vector, got shape {arr.shape}")
    return arr


def _check_pair(x: np.ndarray, y: np.ndarray) -> None:
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValueError("need at least 2 observations")
    if np.ptp(x) == 0:
        raise UndefinedCorrelationError("first vector is constant")
    if np.ptp(y) == 0:
        raise UndefinedCorrelationError("second vector is constant")


def pearson(x, y) -> float:
    """Product-moment correlation of two equal-length vectors.

    Raises UndefinedCorrelationError when either vector is constant.
    """
    x = _as_vector(x)
    y = _as_vector(y)
    _check_pair(x, y)
    xc = x - x.mean()
    yc = y - y.mean()
    sxy = float(np.einsum("i,i->", xc, yc))
    sxx = float(np.einsum("i,i->", xc, xc))
    syy = float(np.einsum("i,i->", yc, yc))
    r = sxy / np.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


@dataclass(frozen=True)
class CorrelationMatrix:
    """Square symmetric correlation matrix over an ordered id list.

    Cells touching a constant column are undefined and stored as NaN;
    ``pair`` returns None for them. The diagonal is 1 exactly where the
    column is non-constant.
    """

    ids: tuple[CapabilityId, ...]
    r: np.ndarray
    n_samples: int

    def __post_init__(self):
        if self.r.shape != (len(self.ids), len(self.ids)):
            raise ValueError("matrix shape does not match id list")

    def index_of(self, cap_id: CapabilityId) -> int:
        try:
            return self.ids.index(cap_id)
        except ValueError:
            raise KeyError(f"id {cap_id} not in correlation matrix") from None

    def pair(self, a: CapabilityId, b: CapabilityId) -> float | None:
        try:
            value = self.r[self.index_of(a), self.index_of(b)]
        except KeyError:
            return None
        return None if np.isnan(value) else float(value)

    def undefined_ids(self) -> list[CapabilityId]:
        return [cap for i, cap in enumerate(self.ids) if np.isnan(self.r[i, i])]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["id"] + [str(c) for c in self.ids])
        for i, cap in enumerate(self.ids):
            row = [str(cap)]
            for j in range(len(self.ids)):
                value = self.r[i, j]
                row.append("" if np.isnan(value) else f"{value:.6f}")
            writer.writerow(row)
        return buffer.getvalue()


def correlation_matrix(dataset: ProfileDataset, ids: Sequence[CapabilityId]) -> CorrelationMatrix:
    """Pairwise Pearson matrix over profile columns.

    The dataset must already be filtered: every profile complete over
    ``ids``. Constant columns yield recorded-undefined (NaN) cells rather
    than propagating through. Symmetric by construction (upper triangle
    mirrored).
    """
    ids = tuple(ids)
    if len(dataset) < 2:
        raise DatasetError(f"need at least 2 profiles, got {len(dataset)}")
    rows = []
    for profile in dataset:
        missing = profile.missing_from(ids)
        if missing:
            raise DatasetError(
                f"profile {profile.agent_id}/{profile.phase.value} incomplete over ids: "
                + ", ".join(str(m) for m in missing)
            )
        rows.append([profile.values[cap] for cap in ids])
    data = np.array(rows, dtype=float)
    constant = np.ptp(data, axis=0) == 0
    n = len(ids)
    r = np.full((n, n), np.nan)
    for i in range(n):
        if not constant[i]:
            r[i, i] = 1.0
        for j in range(i + 1, n):
            if constant[i] or constant[j]:
                continue
            value = pearson(data[:, i], data[:, j])
            r[i, j] = value
            r[j, i] = value
    return CorrelationMatrix(ids=ids, r=r, n_samples=len(dataset))


@dataclass(frozen=True)
class PermutationTestResult:
    statistic: float
    p_value: float
    n_resamples: int
    seed: int

    def __post_init__(self):
        if not 0.0 < self.p_value <= 1.0:
            raise ValueError(f"p_value {self.p_value} outside (0, 1]")


def _resample_permutations(n: int, n_resamples: int, seed: int) -> np.ndarray:
    """Permutation indices, one row per resample.

    Row i is a function of (seed, i) only: a single Philox stream keyed by
    the seed is reshaped to (n_resamples, n) and each row is argsorted into
    a permutation, so resamples are independent of evaluation order.
    """
    bits = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    keys = bits.random((n_resamples, n))
    return np.argsort(keys, axis=1, kind="stable")


def permutation_test(x, y, n_resamples: int = 10_000, seed: int = 0) -> PermutationTestResult:
    """Two-sided Monte Carlo exact test of association via Pearson r.

    The observed statistic is pearson(x, y); the null distribution permutes
    y. The p-value uses the add-one rule p = (b + 1) / (m + 1) with
    b = #{resamples with |r| >= |observed|}, so p is never exactly zero.
    """
    if n_resamples < 1:
        raise ValueError(f"n_resamples must be >= 1, got {n_resamples}")
    x = _as_vector(x)
    y = _as_vector(y)
    observed = pearson(x, y)

    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(np.einsum("i,i->", xc, xc))
    syy = float(np.einsum("i,i->", yc, yc))
    denom = np.sqrt(sxx * syy)

    perms = _resample_permutations(len(y), n_resamples, seed)
    permuted = yc[perms]
    numerators = np.einsum("ij,j->i", permuted, xc)
    null_r = numerators / denom
    b = int(np.sum(np.abs(null_r) >= abs(observed)))
    p = (b + 1) / (n_resamples + 1)
    return PermutationTestResult(statistic=observed, p_value=p, n_resamples=n_resamples, seed=seed)


def pairwise_permutation_pvalues(
    dataset: ProfileDataset,
    ids: Sequence[CapabilityId],
    n_resamples: int = 10_000,
    seed: int = 0,
) -> CorrelationMatrix:
    """Permutation p-values for every id pair, in correlation-matrix shape.

    The pair (i, j) uses a seed derived from (seed, i, j), so the table is
    reproducible regardless of computation order. Pairs touching a constant
    column are undefined (NaN).
    """
    ids = tuple(ids)
    rows = []
    for profile in dataset:
        missing = profile.missing_from(ids)
        if missing:
            raise DatasetError(
                f"profile {profile.agent_id}/{profile.phase.value} incomplete over ids"
            )
        rows.append([profile.values[cap] for cap in ids])
    data = np.array(rows, dtype=float)
    constant = np.ptp(data, axis=0) == 0
    n = len(ids)
    p = np.full((n, n), np.nan)
    for i in range(n):
        for j in range(i + 1, n):
            if constant[i] or constant[j]:
                continue
            pair_seed = int(np.random.SeedSequence((seed, i, j)).generate_state(1)[0])
            result = permutation_test(data[:, i], data[:, j], n_resamples, pair_seed)
            p[i, j] = result.p_value
            p[j, i] = result.p_value
    return CorrelationMatrix(ids=ids, r=p, n_samples=len(dataset))


class CorrelationStrength(str, Enum):
    WEAK = "weak"
    MODERATE = "moderate"
    STRONG = "strong"


def classify_correlation(r: float) -> CorrelationStrength:
    """weak: |r| < 0.4; moderate: 0.4 <= |r| < 0.8; strong: |r| >= 0.8."""
    if abs(r) > 1.0:
        raise ValueError(f"|r| must be <= 1, got {r}")
    magnitude = abs(r)
    if magnitude < 0.4:
        return CorrelationStrength.WEAK
    if magnitude < 0.8:
        return CorrelationStrength.MODERATE
    return CorrelationStrength.STRONG
