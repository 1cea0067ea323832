"""Streaming subspace clustering via sparse self-representation.

The pipeline processes a high-dimensional stream in fixed-size landmark
windows: each window (augmented with representative columns carried from
the previous one) is sparse-coded, spectrally partitioned into
microclusters, merged into macroclusters by sparse similarity degrees,
fine-tuned, and scored for outliers by sparsity residual values.
"""

from .engine import WindowOutputs, init_state, process_window, run_stream
from .model import (
    ClusterLevel,
    ClusterSet,
    DataWindow,
    ObjectDiagnostics,
    PipelineConfig,
    SolverConfig,
    SparseCode,
    StreamState,
    WindowReport,
)
from .solver import solve_sparse_code
from .synth import OUTLIER_LABEL, StreamSpec, gen_shift_event, gen_subspace_stream

__version__ = "0.1.0"

__all__ = [
    "ClusterLevel",
    "ClusterSet",
    "DataWindow",
    "ObjectDiagnostics",
    "OUTLIER_LABEL",
    "PipelineConfig",
    "SolverConfig",
    "SparseCode",
    "StreamSpec",
    "StreamState",
    "WindowOutputs",
    "WindowReport",
    "gen_shift_event",
    "gen_subspace_stream",
    "init_state",
    "process_window",
    "run_stream",
    "solve_sparse_code",
]
