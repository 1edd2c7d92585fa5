"""Figure scripts for the simulator's CSV outputs."""

from .figspec import (
    DEFAULT_LABELS,
    FORMATS,
    INPUT_ARITY,
    KINDS,
    PLOTTED,
    SCHEMAS,
    FigureSpec,
    SchemaError,
    dry_run_text,
    numeric_columns,
    read_raw_columns,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_LABELS",
    "FORMATS",
    "INPUT_ARITY",
    "KINDS",
    "PLOTTED",
    "SCHEMAS",
    "FigureSpec",
    "SchemaError",
    "dry_run_text",
    "numeric_columns",
    "read_raw_columns",
    "__version__",
]
