"""Labeled synthetic high-dimensional streams.

Each class is a random r-dimensional subspace of R^d whose basis rotates
by a fixed angle per window (gradual drift) and can be redrawn wholesale
at a chosen window (sudden shift). Points are Gaussian combinations of
the basis columns plus optional ambient noise, normalized to unit
length. Planted outliers are uniform random directions kept away from
every subspace and carry the reserved label -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .errors import InvalidGeometry
from .model import DataWindow

#: Label reserved for planted outliers.
OUTLIER_LABEL = -1

#: Minimum residual norm an outlier direction must keep against every
#: planted subspace (unit-norm directions; resampled until satisfied).
_OUTLIER_CLEARANCE = 0.5


@dataclass(frozen=True)
class StreamSpec:
    """Geometry and size of a synthetic stream."""

    n_features: int = 20
    n_clusters: int = 3
    subspace_dim: int = 2
    per_window: int = 150
    n_windows: int = 10
    drift_degrees: float = 0.0
    noise_sigma: float = 0.0
    outlier_fraction: float = 0.0
    seed: int = 0
    shift_window: Optional[int] = None
    shift_cluster: int = 0

    def __post_init__(self):
        if self.subspace_dim >= self.n_features:
            raise InvalidGeometry("subspace_dim must be smaller than n_features")
        if self.n_clusters * self.subspace_dim > self.n_features:
            raise InvalidGeometry(
                "k * r must not exceed d for orthogonal subspace planting")
        if self.per_window < 1 or self.n_windows < 1 or self.n_clusters < 1:
            raise InvalidGeometry("stream sizes must be positive")
        if not 0.0 <= self.outlier_fraction < 1.0:
            raise InvalidGeometry("outlier_fraction must lie in [0, 1)")
        if self.shift_window is not None:
            if not 0 <= self.shift_window < self.n_windows:
                raise InvalidGeometry("shift_window must index a window")
            if not 0 <= self.shift_cluster < self.n_clusters:
                raise InvalidGeometry("shift_cluster must index a cluster")


def _random_basis(rng, d: int, r: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((d, r)))
    return q[:, :r]


def _plane_rotation(rng, d: int, angle_rad: float) -> np.ndarray:
    """Rotation by ``angle_rad`` in a random 2-plane of R^d."""
    q, _ = np.linalg.qr(rng.standard_normal((d, 2)))
    u, v = q[:, 0], q[:, 1]
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return (np.eye(d)
            + (c - 1.0) * (np.outer(u, u) + np.outer(v, v))
            + s * (np.outer(u, v) - np.outer(v, u)))


def _draw_outlier(rng, bases, d: int) -> np.ndarray:
    while True:
        o = rng.standard_normal(d)
        o /= np.linalg.norm(o)
        if all(np.linalg.norm(o - B @ (B.T @ o)) >= _OUTLIER_CLEARANCE
               for B in bases):
            return o


def gen_subspace_stream(spec: StreamSpec) -> Iterator[DataWindow]:
    """Yield the stream's windows in order; same spec -> identical stream."""
    rng = np.random.default_rng(spec.seed)
    d, r, k = spec.n_features, spec.subspace_dim, spec.n_clusters
    bases = [_random_basis(rng, d, r) for _ in range(k)]
    rotations = [_plane_rotation(rng, d, math.radians(spec.drift_degrees))
                 for _ in range(k)]
    class_ids = list(range(k))
    next_class_id = k

    n_out = int(round(spec.outlier_fraction * spec.per_window))
    n_valid = spec.per_window - n_out
    sizes = [n_valid // k + (1 if c < n_valid % k else 0) for c in range(k)]

    for t in range(spec.n_windows):
        if spec.shift_window is not None and t == spec.shift_window:
            bases[spec.shift_cluster] = _random_basis(rng, d, r)
            class_ids[spec.shift_cluster] = next_class_id
            next_class_id += 1

        cols = []
        labels = []
        for c in range(k):
            coeffs = rng.standard_normal((r, sizes[c]))
            pts = bases[c] @ coeffs
            if spec.noise_sigma > 0:
                pts = pts + spec.noise_sigma * rng.standard_normal(pts.shape)
            pts /= np.linalg.norm(pts, axis=0, keepdims=True)
            cols.append(pts)
            labels.extend([class_ids[c]] * sizes[c])
        for _ in range(n_out):
            cols.append(_draw_outlier(rng, bases, d)[:, None])
            labels.append(OUTLIER_LABEL)

        matrix = np.hstack(cols)
        labels_arr = np.array(labels)
        order = rng.permutation(spec.per_window)
        ids = tuple(f"w{t}o{i}" for i in range(spec.per_window))
        yield DataWindow(
            matrix=matrix[:, order],
            object_ids=ids,
            labels=tuple(labels_arr[order].tolist()),
            window_index=t,
        )

        if spec.drift_degrees != 0.0:
            bases = [rotations[c] @ bases[c] for c in range(k)]


def gen_shift_event(spec: StreamSpec, shift_window: int,
                    shift_cluster: int = 0) -> Iterator[DataWindow]:
    """Stream with one cluster's subspace redrawn at ``shift_window``;
    the shifted cluster's labels switch to a fresh class identity."""
    shifted = StreamSpec(
        n_features=spec.n_features,
        n_clusters=spec.n_clusters,
        subspace_dim=spec.subspace_dim,
        per_window=spec.per_window,
        n_windows=spec.n_windows,
        drift_degrees=spec.drift_degrees,
        noise_sigma=spec.noise_sigma,
        outlier_fraction=spec.outlier_fraction,
        seed=spec.seed,
        shift_window=shift_window,
        shift_cluster=shift_cluster,
    )
    return gen_subspace_stream(shifted)


def outlier_marks(window: DataWindow) -> np.ndarray:
    """Boolean array marking planted outliers via the reserved label."""
    if window.labels is None:
        return np.zeros(window.n_objects, dtype=bool)
    return np.array([lab == OUTLIER_LABEL for lab in window.labels])
