"""Sparsity residual values, outlier flags and representative selection.

The sparsity residual value (SRV) of an object scores the shape of its
reconstruction residual e:

    srv(e) = (1/||e||_0) * sum_j |e_j| / ||e||_2 = ||e||_1 / (||e||_0 ||e||_2)

It is scale-free and bounded by 1/k <= srv <= 1/sqrt(k) for k = ||e||_0.
Low values mark objects whose residual mass is concentrated (well
represented); values above the threshold sigma flag outliers. The
lowest-SRV members of each cluster are carried forward as dictionary
samples for the next window.
"""

from __future__ import annotations

from typing import List, Sequence

import numpy as np

from .errors import InvalidInput, ZeroResidual
from .model import NUMERIC_ZERO, ClusterSet, ObjectDiagnostics


def srv(e) -> float:
    """Sparsity residual value of one residual vector.

    Raises ZeroResidual when every entry sits at or below the
    numeric-zero floor; callers map that to srv = 0 (perfectly
    represented, never an outlier).
    """
    e = np.asarray(e, dtype=float).ravel()
    if not np.all(np.isfinite(e)):
        raise InvalidInput("residual vector contains NaN/Inf entries")
    mags = np.abs(e)
    support = mags > NUMERIC_ZERO
    k = int(np.count_nonzero(support))
    if k == 0:
        raise ZeroResidual("all residual entries are below the numeric floor")
    picked = mags[support]
    return float(picked.sum() / (k * np.linalg.norm(picked)))


def srv_or_zero(e) -> float:
    """srv(e), with the zero-residual case mapped to 0.0."""
    try:
        return srv(e)
    except ZeroResidual:
        return 0.0


def detect_outliers(diagnostics: Sequence[ObjectDiagnostics], sigma: float) -> List[bool]:
    """Flag objects whose SRV meets or exceeds the threshold sigma."""
    if not 0.0 < sigma < 1.0:
        raise InvalidInput(f"sigma must lie in (0, 1), got {sigma}")
    return [diag.srv >= sigma for diag in diagnostics]


def select_representatives(
    clusters: ClusterSet,
    diagnostics: Sequence[ObjectDiagnostics],
    budget: int,
) -> List[int]:
    """Pick the lowest-SRV non-outlier members across clusters.

    The budget is apportioned to clusters proportionally to their sizes
    (largest-remainder rounding); each cluster contributes its lowest-SRV
    eligible members. Leftover slots (clusters short on eligible members)
    go to the globally lowest-SRV remaining candidates, so the selection
    totals min(budget, eligible objects). A budget below the cluster
    count is clamped up so every cluster can contribute at least one.
    """
    if len(diagnostics) != clusters.n_objects:
        raise InvalidInput("diagnostics must align with the cluster set")
    budget = max(int(budget), clusters.n_clusters)

    eligible = [
        sorted((i for i in members if not diagnostics[i].is_outlier),
               key=lambda i: (diagnostics[i].srv, i))
        for members in clusters.clusters
    ]
    total_eligible = sum(len(m) for m in eligible)
    target = min(budget, total_eligible)
    if target == 0:
        return []

    sizes = np.array([len(m) for m in clusters.clusters], dtype=float)
    raw = budget * sizes / sizes.sum()
    quotas = np.floor(raw).astype(int)
    remainder = budget - int(quotas.sum())
    # distribute leftovers by largest fractional part, ties to lower index
    order = sorted(range(len(raw)), key=lambda c: (-(raw[c] - quotas[c]), c))
    for c in order[:remainder]:
        quotas[c] += 1

    chosen: List[int] = []
    for c, members in enumerate(eligible):
        chosen.extend(members[: quotas[c]])
    if len(chosen) < target:
        taken = set(chosen)
        spare = sorted(
            (i for members in eligible for i in members if i not in taken),
            key=lambda i: (diagnostics[i].srv, i))
        chosen.extend(spare[: target - len(chosen)])
    chosen.sort(key=lambda i: (diagnostics[i].srv, i))
    return chosen[:target]
