"""The landmark-window stream loop.

Per window: concatenate the dictionary bank with the incoming columns,
sparse-code the augmented matrix, spectrally partition the affinity into
microclusters, merge them by SSD, optionally fine-tune, score the
current window's objects by SRV, and replace the bank with the
lowest-SRV non-outlier representatives of the final clusters. Bank
columns take part in coding and clustering (they connect windows) but
never appear in reported labels or metrics.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

from . import evaluate
from .errors import StreamError
from .hierarchy import fine_tune, merge_microclusters
from .model import (
    ClusterLevel,
    ClusterSet,
    DataWindow,
    ObjectDiagnostics,
    PipelineConfig,
    StreamState,
    WindowReport,
)
from .residuals import select_representatives, srv_or_zero
from .solver import solve_sparse_code
from .spectral import build_affinity, ncuts


@dataclass(frozen=True)
class WindowOutputs:
    """Per-object results for one processed window (current objects only)."""

    labels: Tuple[int, ...]
    diagnostics: Tuple[ObjectDiagnostics, ...]
    representatives: Tuple[int, ...]
    n_bank_columns: int


_EMPTY_OUTPUTS = WindowOutputs(labels=(), diagnostics=(), representatives=(),
                               n_bank_columns=0)


def init_state(cfg: PipelineConfig) -> StreamState:
    """Fresh state: empty bank, zero counter, empty history. The config
    is validated on construction, so an invalid one never gets here."""
    return StreamState(
        bank=np.zeros((0, 0)),
        bank_ids=(),
        window_counter=0,
        history=(),
    )


def _window_seed(cfg: PipelineConfig, counter: int) -> int:
    seq = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(counter,))
    return int(seq.generate_state(1)[0])


def process_window(
    state: StreamState,
    window: DataWindow,
    cfg: PipelineConfig,
) -> Tuple[StreamState, WindowReport, WindowOutputs]:
    """Run the full pipeline on one window and advance the state.

    Windows shorter than the microcluster count (including empty ones)
    are skipped: a placeholder report is appended and the bank is left
    untouched. A solver that ran out of iterations is recorded on the
    report, not raised.
    """
    start = time.perf_counter()
    m = cfg.n_microclusters
    n_t = window.n_objects

    if n_t < m:
        report = WindowReport(
            window_index=window.window_index,
            purity=None,
            f_measure=None,
            n_clusters=0,
            n_outliers=0,
            runtime_ms=(time.perf_counter() - start) * 1e3,
            converged=True,
            skipped=True,
        )
        return _advance(state, report), report, _EMPTY_OUTPUTS

    n_bank = state.bank_size
    if n_bank:
        X = np.hstack([state.bank, window.matrix])
    else:
        X = window.matrix

    code = solve_sparse_code(X, cfg.solver)
    W = build_affinity(code.Z)
    m_eff = min(m, X.shape[1])
    micro = ncuts(W, m_eff, seed=_window_seed(cfg, state.window_counter))

    # the degenerate two-class protocol: no merging when m' = 1 and the
    # stream cannot hold more than two classes
    if cfg.k_max <= 2 and cfg.m_prime == 1.0:
        macro = micro.relabel(ClusterLevel.MACRO)
    else:
        macro = merge_microclusters(micro, code.Z, X)
    final = fine_tune(macro, code.Z, X, enabled=cfg.fine_tune)

    diagnostics = []
    for i in range(n_t):
        e = code.E[:, n_bank + i]
        value = srv_or_zero(e)
        diagnostics.append(ObjectDiagnostics(
            srv=value,
            is_outlier=value >= cfg.sigma,
            residual_norm=float(np.linalg.norm(e)),
        ))

    # restrict the final partition to the current window's objects
    window_assign = [final.assignments[n_bank + i] for i in range(n_t)]
    restricted = ClusterSet.from_assignments(window_assign, ClusterLevel.FINAL)

    pur = f1 = None
    if window.labels is not None:
        pur = evaluate.purity(restricted.assignments, window.labels)
        f1 = (evaluate.f_measure(restricted.assignments, window.labels)
              if n_t >= 2 else None)

    reps = select_representatives(restricted, diagnostics, cfg.bank_budget)
    reps = reps[: cfg.bank_budget]  # bank bound wins over per-cluster clamp
    new_bank = window.matrix[:, reps] if reps else np.zeros((window.n_features, 0))
    new_ids = tuple(window.object_ids[i] for i in reps)

    report = WindowReport(
        window_index=window.window_index,
        purity=pur,
        f_measure=f1,
        n_clusters=restricted.n_clusters,
        n_outliers=int(sum(d.is_outlier for d in diagnostics)),
        runtime_ms=(time.perf_counter() - start) * 1e3,
        converged=code.converged,
        skipped=False,
    )
    outputs = WindowOutputs(
        labels=tuple(restricted.assignments),
        diagnostics=tuple(diagnostics),
        representatives=tuple(reps),
        n_bank_columns=n_bank,
    )
    new_state = StreamState(
        bank=new_bank,
        bank_ids=new_ids,
        window_counter=state.window_counter + 1,
        history=state.history + (report,),
    )
    return new_state, report, outputs


def _advance(state: StreamState, report: WindowReport) -> StreamState:
    return StreamState(
        bank=state.bank,
        bank_ids=state.bank_ids,
        window_counter=state.window_counter + 1,
        history=state.history + (report,),
    )


def run_stream(source: Iterable[DataWindow], cfg: PipelineConfig) -> List[WindowReport]:
    """Fold process_window over every window of the source, in order.

    Any per-window failure is re-raised as a StreamError carrying the
    window index.
    """
    state = init_state(cfg)
    reports: List[WindowReport] = []
    for window in source:
        try:
            state, report, _ = process_window(state, window, cfg)
        except StreamError:
            raise
        except Exception as exc:
            raise StreamError(window.window_index, exc) from exc
        reports.append(report)
    return reports


def run_stream_collect(
    source: Iterable[DataWindow],
    cfg: PipelineConfig,
) -> Tuple[List[WindowReport], List[WindowOutputs], StreamState]:
    """run_stream, but also keeping per-window outputs and the end state."""
    state = init_state(cfg)
    reports: List[WindowReport] = []
    outputs: List[WindowOutputs] = []
    for window in source:
        try:
            state, report, out = process_window(state, window, cfg)
        except StreamError:
            raise
        except Exception as exc:
            raise StreamError(window.window_index, exc) from exc
        reports.append(report)
        outputs.append(out)
    return reports, outputs, state
