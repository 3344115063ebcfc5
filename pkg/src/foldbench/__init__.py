"""foldbench: statistical benchmarking harness for per-fold prediction logs."""

from .errors import (
    ConfigError,
    HarnessError,
    HarnessWarning,
    ParseError,
    ValidationError,
)
from .ingest import (
    EpochMetrics,
    ExperimentIndex,
    FoldRun,
    ModelRun,
    PredictionRecord,
    RunMeta,
    parse_epoch_log,
    parse_prediction_file,
    parse_run_meta,
    scan_experiment_dir,
    select_best_epoch,
    serialize_prediction_records,
)
from .metrics import ConfusionMatrix, MetricsReport, confusion_matrix, summarize
from .splits import (
    DatasetManifest,
    FoldPlan,
    SplitPlan,
    load_manifest,
    sample_episode,
    seeded_shuffle,
    stratified_holdout,
    stratified_kfold,
)
from .stats import (
    FriedmanResult,
    NemenyiResult,
    RankMatrix,
    ScoreTable,
    friedman,
    nemenyi,
    rank_matrix,
)
from .report import (
    ColumnSpec,
    FewShotSummary,
    TableModel,
    TableRow,
    fewshot_aggregate,
    format_mean_std,
    render_csv,
    render_latex_table,
)
from .cd_diagram import cd_diagram_svg, connector_groups
from .config import MISSING, get_path, load_config, merge

__version__ = "0.1.0"

__all__ = [
    "ColumnSpec",
    "ConfigError",
    "ConfusionMatrix",
    "DatasetManifest",
    "EpochMetrics",
    "ExperimentIndex",
    "FewShotSummary",
    "FoldPlan",
    "FoldRun",
    "FriedmanResult",
    "HarnessError",
    "HarnessWarning",
    "MetricsReport",
    "MISSING",
    "ModelRun",
    "NemenyiResult",
    "ParseError",
    "PredictionRecord",
    "RankMatrix",
    "RunMeta",
    "ScoreTable",
    "SplitPlan",
    "TableModel",
    "TableRow",
    "ValidationError",
    "cd_diagram_svg",
    "confusion_matrix",
    "connector_groups",
    "fewshot_aggregate",
    "format_mean_std",
    "friedman",
    "get_path",
    "load_config",
    "load_manifest",
    "merge",
    "nemenyi",
    "parse_epoch_log",
    "parse_prediction_file",
    "parse_run_meta",
    "rank_matrix",
    "render_csv",
    "render_latex_table",
    "sample_episode",
    "scan_experiment_dir",
    "seeded_shuffle",
    "select_best_epoch",
    "serialize_prediction_records",
    "stratified_holdout",
    "stratified_kfold",
    "summarize",
]
