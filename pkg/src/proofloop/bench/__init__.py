"""Benchmark harness: manifests, resumable runs, reports, analytics."""

from .analytics import (  # noqa: F401
    DEFAULT_TACTIC_VOCABULARY,
    TACTIC_NAMES,
    TacticVocabulary,
    ToolUsageStats,
    aggregate_tool_usage,
    format_fraction,
    percent_round_half_up,
    render_tool_usage_table,
    tactic_sets_table,
)
from .dataset import (  # noqa: F401
    BenchmarkManifest,
    DatasetEntry,
    ManifestError,
    load_manifest,
    load_task,
)
from .report import (  # noqa: F401
    RunReport,
    TaskRecord,
    accuracy_table,
    load_run,
    tactic_table,
    tool_usage_table,
)
from .runner import (  # noqa: F401
    BenchConfigError,
    CheckStatus,
    ExternalCheck,
    external_check,
    run_benchmark,
)
