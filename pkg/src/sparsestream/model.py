"""Shared domain types for the solver, clustering and stream layers.

Objects are columns throughout: a window holds a d x n matrix whose n
columns are data objects with d features. All types are immutable after
construction; pipeline stages produce new values instead of mutating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, InvalidInput

#: Magnitudes at or below this floor are treated as exact zeros when
#: counting residual support.
NUMERIC_ZERO = 1e-12

NOISE_NORMS = ("l21", "l1", "fro")


def _as_matrix(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise InvalidInput(f"{name} must be a 2-D matrix, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains NaN or Inf entries")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DataWindow:
    """One landmark window: a d x n matrix of objects plus bookkeeping.

    Parameters
    ----------
    matrix : (d, n) array
        Feature columns, one per object. Must be finite.
    object_ids : sequence
        Stable identifiers, unique within the window.
    labels : sequence or None
        Optional ground-truth class identifiers, length n.
    window_index : int
        Position of the window in the stream.
    """

    matrix: np.ndarray
    object_ids: Tuple
    labels: Optional[Tuple]
    window_index: int = 0

    def __init__(self, matrix, object_ids=None, labels=None, window_index=0):
        mat = _freeze(_as_matrix(matrix, "window matrix"))
        n = mat.shape[1]
        if object_ids is None:
            object_ids = tuple(range(n))
        else:
            object_ids = tuple(object_ids)
        if len(object_ids) != n:
            raise InvalidInput(
                f"expected {n} object ids, got {len(object_ids)}")
        if len(set(object_ids)) != n:
            raise InvalidInput("object ids must be unique within a window")
        if labels is not None:
            labels = tuple(labels)
            if len(labels) != n:
                raise InvalidInput(
                    f"labels must have length {n}, got {len(labels)}")
        if window_index < 0:
            raise InvalidInput("window_index must be non-negative")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "object_ids", object_ids)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "window_index", int(window_index))

    @property
    def n_objects(self) -> int:
        return self.matrix.shape[1]

    @property
    def n_features(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the augmented-Lagrange sparse-coding solver.

    Defaults follow the standard inexact-ALM initialisation (penalty
    from 1e-2 clamped at 1e10, stop when both max-norm residuals drop
    below 1e-6), except that the penalty growth factor is 1.05 rather
    than the customary 1.1: the faster schedule freezes the objective
    around 1e-3 relative suboptimality on small instances, while 1.05
    reaches 1e-6 at a modest iteration cost.
    """

    lam: float = 1.0
    mu0: float = 1e-2
    mu_max: float = 1e10
    rho: float = 1.05
    epsilon: float = 1e-6
    max_iters: int = 500
    noise_norm: str = "l21"
    zero_diagonal: bool = True

    def __post_init__(self):
        if self.lam <= 0:
            raise ConfigError(f"lambda must be positive, got {self.lam}")
        if self.mu0 <= 0:
            raise ConfigError(f"mu0 must be positive, got {self.mu0}")
        if self.mu0 >= self.mu_max:
            raise ConfigError("mu0 must be smaller than mu_max")
        if self.rho <= 1:
            raise ConfigError(f"rho must exceed 1, got {self.rho}")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")
        if self.noise_norm not in NOISE_NORMS:
            raise ConfigError(
                f"noise_norm must be one of {NOISE_NORMS}, got {self.noise_norm!r}")


@dataclass(frozen=True)
class SparseCode:
    """Solver output: coefficients Z (n x n), noise E (d x n), diagnostics.

    ``final_residuals`` holds the max-norms of X - XZ - E and Z - J at
    exit; when ``converged`` both are below the solver tolerance.
    """

    Z: np.ndarray
    E: np.ndarray
    iterations: int
    converged: bool
    final_residuals: Tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "Z", _freeze(self.Z))
        object.__setattr__(self, "E", _freeze(self.E))


class ClusterLevel(Enum):
    MICRO = "micro"
    MACRO = "macro"
    FINAL = "final"


@dataclass(frozen=True)
class ClusterSet:
    """A partition of window columns {0..n-1} into non-empty clusters.

    ``assignments[i]`` is the cluster index of object i; ``clusters[c]``
    is the sorted tuple of member indices of cluster c. Both views are
    kept consistent by construction.
    """

    assignments: Tuple[int, ...]
    clusters: Tuple[Tuple[int, ...], ...]
    level: ClusterLevel

    @staticmethod
    def from_assignments(assignments: Sequence[int], level: ClusterLevel) -> "ClusterSet":
        """Build a ClusterSet from raw labels, compacting cluster indices
        to 0..k-1 in order of first appearance."""
        assignments = list(assignments)
        if not assignments:
            raise InvalidInput("cannot build a ClusterSet over zero objects")
        remap = {}
        compact = []
        for a in assignments:
            if a not in remap:
                remap[a] = len(remap)
            compact.append(remap[a])
        members = [[] for _ in range(len(remap))]
        for i, c in enumerate(compact):
            members[c].append(i)
        return ClusterSet(
            assignments=tuple(compact),
            clusters=tuple(tuple(m) for m in members),
            level=level,
        )

    @staticmethod
    def from_clusters(clusters: Sequence[Sequence[int]], level: ClusterLevel) -> "ClusterSet":
        """Build a ClusterSet from member lists (must partition 0..n-1)."""
        n = sum(len(c) for c in clusters)
        assignments = [-1] * n
        for c, members in enumerate(clusters):
            if len(members) == 0:
                raise InvalidInput("empty cluster in member lists")
            for i in members:
                if not (0 <= i < n) or assignments[i] != -1:
                    raise InvalidInput("member lists do not partition the window")
                assignments[i] = c
        return ClusterSet(
            assignments=tuple(assignments),
            clusters=tuple(tuple(sorted(m)) for m in clusters),
            level=level,
        )

    def __post_init__(self):
        n = len(self.assignments)
        seen = [False] * n
        for c, members in enumerate(self.clusters):
            if len(members) == 0:
                raise InvalidInput(f"cluster {c} is empty")
            for i in members:
                if not (0 <= i < n) or seen[i]:
                    raise InvalidInput("clusters do not partition the window")
                seen[i] = True
                if self.assignments[i] != c:
                    raise InvalidInput(
                        "assignments and member sets are inconsistent")
        if not all(seen):
            raise InvalidInput("clusters do not cover every object")

    @property
    def n_objects(self) -> int:
        return len(self.assignments)

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    def relabel(self, level: ClusterLevel) -> "ClusterSet":
        return ClusterSet(self.assignments, self.clusters, level)


@dataclass(frozen=True)
class ObjectDiagnostics:
    """Per-object residual scores for one window.

    ``srv`` is the sparsity residual value in (0, 1], or exactly 0.0 for
    a perfectly represented object (zero residual), which is never an
    outlier.
    """

    srv: float
    is_outlier: bool
    residual_norm: float

    def __post_init__(self):
        if not 0.0 <= self.srv <= 1.0:
            raise InvalidInput(f"srv out of range: {self.srv}")
        if self.residual_norm < 0:
            raise InvalidInput("residual_norm must be non-negative")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the stream engine needs for one run.

    ``m_prime`` multiplies ``k_max`` (the maximum class count expected in
    the stream) to give the microcluster count m = ceil(m_prime * k_max).
    ``sigma`` is the outlier threshold on SRVs, ``fine_tune`` toggles the
    reassignment pass, and ``rep_fraction`` bounds the dictionary bank at
    ceil(rep_fraction * window_size) columns.
    """

    window_size: int
    k_max: int
    m_prime: float = 1.0
    sigma: float = 0.5
    fine_tune: bool = True
    rep_fraction: float = 0.1
    seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.window_size < 1:
            raise ConfigError("window_size must be positive")
        if self.k_max < 1:
            raise ConfigError("k_max must be a positive integer")
        if not 1.0 <= self.m_prime <= 2.0:
            raise ConfigError(
                f"m_prime must lie in [1, 2], got {self.m_prime}")
        if not 0.0 < self.sigma < 1.0:
            raise ConfigError(f"sigma must lie in (0, 1), got {self.sigma}")
        if not 0.0 < self.rep_fraction <= 1.0:
            raise ConfigError(
                f"rep_fraction must lie in (0, 1], got {self.rep_fraction}")
        if self.n_microclusters < 1:
            raise ConfigError("derived microcluster count must be >= 1")
        if self.window_size < self.n_microclusters:
            raise ConfigError(
                f"window_size {self.window_size} is smaller than the derived "
                f"microcluster count {self.n_microclusters}")

    @property
    def n_microclusters(self) -> int:
        """m = ceil(m_prime * k_max)."""
        return int(math.ceil(self.m_prime * self.k_max))

    @property
    def bank_budget(self) -> int:
        """Dictionary-bank column budget: ceil(rep_fraction * window_size)."""
        return int(math.ceil(self.rep_fraction * self.window_size))


@dataclass(frozen=True)
class WindowReport:
    """Per-window metrics appended to the stream history.

    ``purity`` and ``f_measure`` are None when the window carried no
    ground-truth labels. ``skipped`` marks windows too short to process
    (fewer columns than the microcluster count); skipped windows report
    zero clusters and are excluded from aggregates.
    """

    window_index: int
    purity: Optional[float]
    f_measure: Optional[float]
    n_clusters: int
    n_outliers: int
    runtime_ms: float
    converged: bool = True
    skipped: bool = False


@dataclass(frozen=True)
class StreamState:
    """Mutable-by-replacement state threaded through the stream loop.

    ``bank`` holds the representative columns carried from the previous
    window (d x r, zero columns before the first window completes) and
    ``bank_ids`` their provenance identifiers.
    """

    bank: np.ndarray
    bank_ids: Tuple
    window_counter: int
    history: Tuple[WindowReport, ...]

    def __post_init__(self):
        object.__setattr__(self, "bank", _freeze(np.asarray(self.bank, dtype=float)))

    @property
    def bank_size(self) -> int:
        return 0 if self.bank.size == 0 else self.bank.shape[1]
