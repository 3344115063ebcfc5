"""runlog-exporter: record training-loop folds in the harness formats."""

from .writer import META_KEYS, ExporterError, RunWriter

__version__ = "0.1.0"

__all__ = ["ExporterError", "META_KEYS", "RunWriter"]
