"""Architecture-independent workload characterization for parallel kernels.

The package simulates small data-parallel kernels over an NDRange,
records an execution-event trace, and computes an architecture-neutral
metric set covering compute, parallelism, memory and control behaviour,
plus derived metrics and suite-normalized comparison tables.
"""

from .buffers import make_buffer
from .entropy import branch_entropy, coverage_count, local_entropy, shannon_entropy
from .ir import KernelProgram, parse_kernel
from .metrics import (
    KernelAccumulator,
    consume,
    finalize,
    merge_accumulators,
    summarize_distribution,
)
from .report import (
    AiwcReport,
    DerivedMetrics,
    KiviatTable,
    derive,
    emit_report,
    load_report,
    normalize_suite,
)
from .sim import NDRangeConfig, simulate, simulate_events
from .trace import (
    TraceEvent,
    ValidationReport,
    decode_event,
    encode_event,
    read_trace,
    validate_stream,
    write_trace,
)

__version__ = "0.1.0"

__all__ = [
    "AiwcReport",
    "DerivedMetrics",
    "KernelAccumulator",
    "KernelProgram",
    "KiviatTable",
    "NDRangeConfig",
    "TraceEvent",
    "ValidationReport",
    "branch_entropy",
    "consume",
    "coverage_count",
    "decode_event",
    "derive",
    "emit_report",
    "encode_event",
    "finalize",
    "load_report",
    "local_entropy",
    "make_buffer",
    "merge_accumulators",
    "normalize_suite",
    "parse_kernel",
    "read_trace",
    "shannon_entropy",
    "simulate",
    "simulate_events",
    "summarize_distribution",
    "validate_stream",
    "write_trace",
]
