"""Microcluster merging and macrocluster fine-tuning.

Both stages reuse the window's global coefficient matrix: the similarity
of an object to a cluster is judged by the residual left after keeping
only its coefficients on that cluster's members (no per-pair re-solves).

Merging compares clusters by their sparse similarity degree (SSD): the
sum over one cluster's members of those restricted residual norms
against the other cluster. Per pass, each cluster nominates its
lowest-SSD candidate, the nomination is kept when the pairwise SSDs do
not exceed the merged cluster's SSD against any third cluster, and
mutually nominated groups are merged; passes repeat until none merges.

A nomination additionally requires genuine representation evidence: in
at least one direction the restricted coefficients must shrink the
members' aggregate residual by a minimum fraction of its no-information
baseline (the plain sum of member norms, reached when the restricted
coefficients are all zero). Without this gate two clusters whose
cross-coefficients vanish would still satisfy the third-cluster bound
(the bound sums over strictly more members) and every partition would
collapse. Evidence is accepted from either direction because sparse
supports concentrate: a split cluster's columns may all be coded by the
other half without the reverse holding.
"""

from __future__ import annotations

from typing import List, Set

import numpy as np

from .errors import EmptyCluster, SameCluster
from .model import ClusterLevel, ClusterSet

#: Minimum relative reduction of a cluster's aggregate residual (vs. the
#: sum of its member norms) for another cluster to count as a merge
#: candidate. Well below the reduction seen between genuinely split
#: clusters (~0.3+), far above solver noise (~1e-6).
MIN_REPRESENTATION_GAIN = 0.2


def restricted_residual(l: int, j: int, Z, X, clusters: ClusterSet) -> np.ndarray:
    """Residual of object l reconstructed from cluster j's members only.

    e_l = x_l - X_j z, where z is column l of Z restricted to cluster j's
    member rows (dropping l itself when it belongs to cluster j).
    """
    Z = np.asarray(Z, dtype=float)
    X = np.asarray(X, dtype=float)
    if not 0 <= j < clusters.n_clusters or not clusters.clusters[j]:
        raise EmptyCluster(f"cluster {j} has no members")
    members = [m for m in clusters.clusters[j] if m != l]
    x_l = X[:, l]
    if not members:
        return x_l.copy()
    return x_l - X[:, members] @ Z[members, l]


def ssd(i: int, j: int, Z, X, clusters: ClusterSet) -> float:
    """Sparse similarity degree S(X_i, X_j): sum over cluster i's members
    of their restricted-residual norms against cluster j. Asymmetric."""
    if i == j:
        raise SameCluster(f"ssd requires distinct clusters, got i=j={i}")
    total = 0.0
    for l in clusters.clusters[i]:
        total += float(np.linalg.norm(restricted_residual(l, j, Z, X, clusters)))
    return total


def _residual_norms_by_cluster(clusters: ClusterSet, Z, X) -> np.ndarray:
    """norms[j, l] = ||x_l - X_j Z[members_j, l]|| for every object l.

    Column l's own coefficient is not excluded here; cross-cluster reads
    (j != cluster of l) never hit it, which is all merging needs.
    """
    Z = np.asarray(Z, dtype=float)
    X = np.asarray(X, dtype=float)
    s = clusters.n_clusters
    norms = np.empty((s, X.shape[1]))
    for j, members in enumerate(clusters.clusters):
        mem = list(members)
        R = X - X[:, mem] @ Z[mem, :]
        norms[j] = np.linalg.norm(R, axis=0)
    return norms


def _ssd_matrix(clusters: ClusterSet, Z, X) -> np.ndarray:
    """All pairwise SSDs; the diagonal is undefined and set to +inf."""
    norms = _residual_norms_by_cluster(clusters, Z, X)
    s = clusters.n_clusters
    S = np.empty((s, s))
    for i, members in enumerate(clusters.clusters):
        # element j: sum over i's members of their residual norms vs cluster j
        S[i] = norms[:, list(members)].sum(axis=1)
    np.fill_diagonal(S, np.inf)
    return S


def merge_pass_groups(clusters: ClusterSet, Z, X) -> List[Set[int]]:
    """One evaluation pass: the groups a merge pass would fuse.

    Used both by :func:`merge_microclusters` and by stability checks
    (after merging converges, this must return no groups).
    """
    s = clusters.n_clusters
    if s < 2:
        return []
    X = np.asarray(X, dtype=float)
    S = _ssd_matrix(clusters, Z, X)
    col_norms = np.linalg.norm(X, axis=0)
    baseline = np.array([col_norms[list(m)].sum() for m in clusters.clusters])
    gate = (1.0 - MIN_REPRESENTATION_GAIN) * baseline

    marks = np.zeros((s, s), dtype=bool)
    for i in range(s):
        allowed = [j for j in range(s) if j != i
                   and (S[i, j] < gate[i] or S[j, i] < gate[j])]
        if not allowed:
            continue
        j = min(allowed, key=lambda c: (S[i, c], c))
        others = [p for p in range(s) if p != i and p != j]
        if others:
            bound = min(S[i, p] + S[j, p] for p in others)
            if max(S[i, j], S[j, i]) > bound:
                continue
        marks[i, j] = True

    groups: List[Set[int]] = []
    merged: Set[int] = set()
    for i in range(s):
        if i in merged:
            continue
        mutual = {j for j in range(s) if marks[i, j] and marks[j, i]} - merged
        if mutual:
            group = {i} | mutual
            groups.append(group)
            merged |= group
    return groups


def merge_microclusters(clusters: ClusterSet, Z, X) -> ClusterSet:
    """Merge microclusters into macroclusters, repeating evaluation
    passes until one completes with no merge."""
    current = clusters
    while True:
        groups = merge_pass_groups(current, Z, X)
        if not groups:
            break
        grouped: Set[int] = set()
        new_members: List[List[int]] = []
        by_leader = {min(g): g for g in groups}
        for i in range(current.n_clusters):
            if i in grouped:
                continue
            if i in by_leader:
                fused: List[int] = []
                for c in sorted(by_leader[i]):
                    fused.extend(current.clusters[c])
                new_members.append(sorted(fused))
                grouped |= by_leader[i]
            else:
                new_members.append(list(current.clusters[i]))
        current = ClusterSet.from_clusters(new_members, ClusterLevel.MACRO)
    return current.relabel(ClusterLevel.MACRO)


def reconstruction_errors(clusters: ClusterSet, Z, X) -> np.ndarray:
    """err[j, l]: squared residual of object l against cluster j with
    memberships frozen, excluding l's own coefficient inside its cluster."""
    Z = np.asarray(Z, dtype=float)
    X = np.asarray(X, dtype=float)
    s = clusters.n_clusters
    err = np.empty((s, X.shape[1]))
    for j, members in enumerate(clusters.clusters):
        mem = list(members)
        R = X - X[:, mem] @ Z[mem, :]
        # undo the self term for this cluster's own members
        R = R.copy()
        for l in mem:
            R[:, l] += X[:, l] * Z[l, l]
        err[j] = np.sum(R * R, axis=0)
    return err


def fine_tune(clusters: ClusterSet, Z, X, enabled: bool = True) -> ClusterSet:
    """One reassignment pass over all objects.

    Each object moves to the cluster with the smallest frozen
    reconstruction error when that error is strictly below its current
    one; moves that would empty a cluster are skipped. With
    ``enabled=False`` the partition passes through unchanged.
    """
    if not enabled:
        return clusters.relabel(ClusterLevel.FINAL)
    err = reconstruction_errors(clusters, Z, X)
    assignments = list(clusters.assignments)
    live = [len(m) for m in clusters.clusters]
    for i, members in enumerate(clusters.clusters):
        for l in members:
            best = int(np.argmin(err[:, l]))
            if best != i and err[best, l] < err[i, l] and live[i] > 1:
                assignments[l] = best
                live[i] -= 1
                live[best] += 1
    # keep cluster indices aligned with the input macroclusters
    new_members = [[] for _ in clusters.clusters]
    for l, c in enumerate(assignments):
        new_members[c].append(l)
    return ClusterSet.from_clusters(new_members, ClusterLevel.FINAL)
