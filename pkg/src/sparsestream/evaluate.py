"""Clustering metrics, noise corruption and the outlier-detection protocol.

Purity is the fraction of objects landing in the majority true class of
their cluster. The F-measure is pairwise F1 over object pairs that are
co-clustered in the prediction versus the ground truth (a cluster-to-
class matched variant is available for sensitivity checks). Noise
corruption replaces an exact number of randomly chosen cells of a
normalized matrix with Uniform[0,1] draws.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import (
    EmptyTrain,
    InsufficientData,
    InvalidInput,
    LengthMismatch,
    NotNormalized,
)
from .model import PipelineConfig
from .residuals import srv_or_zero
from .solver import solve_sparse_code
from .synth import OUTLIER_LABEL


def purity(pred: Sequence, truth: Sequence) -> float:
    """(1/n) * sum over predicted clusters of the majority class count."""
    if len(pred) != len(truth):
        raise LengthMismatch(
            f"pred has {len(pred)} entries, truth has {len(truth)}")
    n = len(pred)
    if n < 1:
        raise InvalidInput("purity needs at least one object")
    counts: dict = {}
    for p, t in zip(pred, truth):
        counts.setdefault(p, Counter())[t] += 1
    majority = sum(max(c.values()) for c in counts.values())
    return majority / n


def _pair_counts(pred, truth) -> Tuple[int, int, int]:
    """(TP, FP, FN) over object pairs, via contingency counts."""
    cont: dict = {}
    pred_sizes: Counter = Counter()
    truth_sizes: Counter = Counter()
    for p, t in zip(pred, truth):
        cont[(p, t)] = cont.get((p, t), 0) + 1
        pred_sizes[p] += 1
        truth_sizes[t] += 1

    def pairs(c):
        return c * (c - 1) // 2

    tp = sum(pairs(c) for c in cont.values())
    tp_fp = sum(pairs(c) for c in pred_sizes.values())
    tp_fn = sum(pairs(c) for c in truth_sizes.values())
    return tp, tp_fp - tp, tp_fn - tp


def f_measure(pred: Sequence, truth: Sequence, variant: str = "pairwise") -> float:
    """Pairwise F1 between the predicted and true partitions.

    Computed as 2*TP / (2*TP + FP + FN) over co-clustered pairs, which
    equals the harmonic mean of pair precision and recall. When no pair
    is co-clustered in either partition the partitions agree vacuously
    (1.0); with TP = 0 otherwise the score is 0. ``variant="matched"``
    gives the class-matched alternative instead.
    """
    if len(pred) != len(truth):
        raise LengthMismatch(
            f"pred has {len(pred)} entries, truth has {len(truth)}")
    if len(pred) < 2:
        raise InvalidInput("f_measure needs at least two objects")
    if variant == "matched":
        return _matched_f_measure(pred, truth)
    if variant != "pairwise":
        raise InvalidInput(f"unknown f_measure variant {variant!r}")
    tp, fp, fn = _pair_counts(pred, truth)
    if tp == 0:
        return 1.0 if fp == 0 and fn == 0 else 0.0
    return 2 * tp / (2 * tp + fp + fn)


def _matched_f_measure(pred, truth) -> float:
    """Class-matched F1: each true class scores against its best cluster,
    weighted by class size."""
    n = len(pred)
    cont: dict = {}
    pred_sizes: Counter = Counter()
    truth_sizes: Counter = Counter()
    for p, t in zip(pred, truth):
        cont[(p, t)] = cont.get((p, t), 0) + 1
        pred_sizes[p] += 1
        truth_sizes[t] += 1
    total = 0.0
    for t, t_size in truth_sizes.items():
        best = 0.0
        for p, p_size in pred_sizes.items():
            overlap = cont.get((p, t), 0)
            if overlap:
                prec = overlap / p_size
                rec = overlap / t_size
                best = max(best, 2 * prec * rec / (prec + rec))
        total += t_size * best
    return total / n


def min_max_normalize(X) -> np.ndarray:
    """Scale each feature (row) into [0, 1]; constant rows map to 0."""
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise InvalidInput("matrix contains NaN/Inf entries")
    lo = X.min(axis=1, keepdims=True)
    span = X.max(axis=1, keepdims=True) - lo
    out = np.zeros_like(X)
    np.divide(X - lo, span, out=out, where=span > 0)
    return out


def inject_noise(X, ratio: float, seed: int) -> np.ndarray:
    """Replace exactly floor(ratio * d * n) distinct cells with U[0,1] draws.

    Requires entries already in [0, 1]; corrupted cell positions and
    values are deterministic for a given seed.
    """
    X = np.asarray(X, dtype=float)
    if not 0.0 < ratio < 1.0:
        raise InvalidInput(f"ratio must lie in (0, 1), got {ratio}")
    if X.min() < -1e-9 or X.max() > 1.0 + 1e-9:
        raise NotNormalized("entries must lie in [0, 1]; normalize first")
    count = int(math.floor(ratio * X.size))
    out = X.copy()
    if count == 0:
        return out
    rng = np.random.default_rng(seed)
    cells = rng.choice(X.size, size=count, replace=False)
    out.flat[cells] = rng.uniform(0.0, 1.0, size=count)
    return out


def one_nn_outlier(train, test, theta: float) -> np.ndarray:
    """Flag test columns whose nearest train column is at distance >= theta."""
    train = np.asarray(train, dtype=float)
    test = np.asarray(test, dtype=float)
    if train.size == 0 or train.shape[1] == 0:
        raise EmptyTrain("nearest-neighbour reference set is empty")
    return nearest_neighbor_distances(train, test) >= theta


def nearest_neighbor_distances(train, test) -> np.ndarray:
    """Euclidean distance from each test column to its nearest train column."""
    train = np.asarray(train, dtype=float)
    test = np.asarray(test, dtype=float)
    t2 = np.sum(train * train, axis=0)
    s2 = np.sum(test * test, axis=0)
    d2 = s2[:, None] - 2.0 * test.T @ train + t2[None, :]
    return np.sqrt(np.maximum(d2.min(axis=1), 0.0))


def srv_outlier_scores(train, test, cfg: PipelineConfig) -> np.ndarray:
    """SRVs of the test columns after sparse-coding the combined window."""
    combined = np.hstack([train, test])
    code = solve_sparse_code(combined, cfg.solver)
    start = train.shape[1]
    return np.array([srv_or_zero(code.E[:, start + i])
                     for i in range(test.shape[1])])


def outlier_experiment(
    windows: Sequence,
    cfg: PipelineConfig,
    trials: int = 10,
    theta: Optional[float] = None,
    validation_windows: Optional[Sequence] = None,
) -> Tuple[float, float]:
    """Half/half outlier protocol: average error rates of the SRV detector
    and a tuned nearest-neighbour baseline.

    Each trial takes two successive windows: the first window's valid
    objects are the clustered half (the reference set), the second
    window's objects (valid plus planted outliers) are scored. An error
    is a valid object flagged or a planted outlier missed. When
    ``theta`` is not given it is swept on ``validation_windows`` (their
    first trial pair) to minimize the baseline's error there.
    """
    windows = list(windows)
    if len(windows) < 2 * trials:
        raise InsufficientData(
            f"{2 * trials} windows needed for {trials} trials, got {len(windows)}")
    for w in windows[: 2 * trials]:
        if w.labels is None:
            raise InsufficientData("outlier experiment needs labeled windows")

    if theta is None:
        pool = list(validation_windows) if validation_windows is not None else windows
        theta = tune_theta(pool[0], pool[1], cfg)

    srv_errors = []
    nn_errors = []
    for trial in range(trials):
        train_w, test_w = windows[2 * trial], windows[2 * trial + 1]
        train, test, truth = _trial_split(train_w, test_w)
        scores = srv_outlier_scores(train, test, cfg)
        srv_flags = scores >= cfg.sigma
        nn_flags = one_nn_outlier(train, test, theta)
        srv_errors.append(float(np.mean(srv_flags != truth)))
        nn_errors.append(float(np.mean(nn_flags != truth)))
    return float(np.mean(srv_errors)), float(np.mean(nn_errors))


def tune_theta(train_w, test_w, cfg: PipelineConfig) -> float:
    """Best nearest-neighbour threshold on one validation window pair,
    swept over the observed distance quantiles."""
    train, test, truth = _trial_split(train_w, test_w)
    dists = nearest_neighbor_distances(train, test)
    best_theta, best_err = float(np.median(dists)), np.inf
    for q in np.linspace(0.0, 1.0, 101):
        cand = float(np.quantile(dists, q))
        err = float(np.mean((dists >= cand) != truth))
        if err < best_err:
            best_err, best_theta = err, cand
    return best_theta


def _trial_split(train_w, test_w):
    train_valid = [i for i, lab in enumerate(train_w.labels)
                   if lab != OUTLIER_LABEL]
    train = train_w.matrix[:, train_valid]
    test = test_w.matrix
    truth = np.array([lab == OUTLIER_LABEL for lab in test_w.labels])
    return train, test, truth
