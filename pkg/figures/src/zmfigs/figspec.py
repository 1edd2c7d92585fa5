"""Figure descriptions and the CSV contract they consume.

The simulator's CSV files are the only interface: fixed headers, comma
separated, no quoting. Validation happens when a FigureSpec is built so
every later step can trust the data.
"""

import os
from dataclasses import dataclass, field

import numpy as np

KINDS = ("traces_overlay", "envelope", "sweep_line", "classical")
FORMATS = ("png", "svg")

# full documented header per figure kind
SCHEMAS = {
    "traces_overlay": ("storage_time_us", "t_us", "amp_re", "amp_im", "intensity"),
    "envelope": ("storage_time_us", "peak_time_us", "peak_intensity"),
    "sweep_line": ("b_gauss", "freq_hz", "freq2_hz", "tau_us", "model"),
    "classical": ("t_us", "Mx", "My", "Mz"),
}

# columns a figure actually draws; dry-run emits exactly these
PLOTTED = {
    "traces_overlay": ("storage_time_us", "t_us", "intensity"),
    "envelope": ("storage_time_us", "peak_intensity"),
    "sweep_line": ("b_gauss", "freq_hz"),
    "classical": ("t_us", "Mx", "My", "Mz"),
}

# string-valued columns are never parsed as numbers
TEXT_COLUMNS = {"model"}

# how many input CSVs each kind accepts (min, max)
INPUT_ARITY = {
    "traces_overlay": (1, 1),
    "envelope": (1, 2),
    "sweep_line": (1, 1),
    "classical": (1, 8),
}

DEFAULT_LABELS = {
    "traces_overlay": ("time after write (us)", "retrieved intensity (normalized)"),
    "envelope": ("storage time (us)", "peak intensity (normalized)"),
    "sweep_line": ("field magnitude (G)", "frequency (Hz)"),
    "classical": ("time (us)", "moment component"),
}


class SchemaError(ValueError):
    """A CSV does not match the documented contract; names the column."""


def read_raw_columns(path: str, kind: str) -> dict[str, list[str]]:
    """Columns of a contract CSV as raw strings, exactly as written.

    The header must equal the documented schema for the kind; the first
    offending column is named in the error.
    """
    expected = SCHEMAS[kind]
    if not os.path.isfile(path):
        raise SchemaError(f"input file not found: {path}")
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line for line in handle.read().splitlines() if line.strip()]
    if not lines:
        raise SchemaError(f"{path} is empty")
    header = tuple(lines[0].split(","))
    for name in expected:
        if name not in header:
            raise SchemaError(f"{path}: missing column {name!r}")
    for name in header:
        if name not in expected:
            raise SchemaError(f"{path}: unexpected column {name!r}")
    if header != expected:
        raise SchemaError(f"{path}: column order must be {','.join(expected)}")

    columns = {name: [] for name in header}
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(header):
            raise SchemaError(f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}")
        for name, cell in zip(header, cells):
            columns[name].append(cell)
    if not columns[expected[0]]:
        raise SchemaError(f"{path} holds no data rows")
    return columns


def numeric_columns(path: str, raw: dict[str, list[str]], kind: str) -> dict[str, np.ndarray]:
    """Parse every non-text column to float64, naming any bad column."""
    out = {}
    for name, cells in raw.items():
        if name in TEXT_COLUMNS:
            continue
        try:
            out[name] = np.array([float(c) for c in cells])
        except ValueError:
            raise SchemaError(f"{path}: column {name!r} holds non-numeric data") from None
    return out


@dataclass(frozen=True)
class FigureSpec:
    """One figure to render: inputs, kind, output path, axis labels."""

    kind: str
    inputs: tuple
    output: str = ""
    fmt: str = "png"
    x_label: str = ""
    y_label: str = ""
    raw: dict = field(default=None, compare=False)
    data: dict = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r} (choose from {', '.join(KINDS)})")
        if self.fmt not in FORMATS:
            raise SchemaError(f"unknown format {self.fmt!r} (choose from {', '.join(FORMATS)})")
        inputs = tuple(str(p) for p in self.inputs)
        lo, hi = INPUT_ARITY[self.kind]
        if not (lo <= len(inputs) <= hi):
            raise SchemaError(f"{self.kind} takes {lo}..{hi} input files, got {len(inputs)}")
        raw = {path: read_raw_columns(path, self.kind) for path in inputs}
        data = {path: numeric_columns(path, raw[path], self.kind) for path in inputs}
        x_default, y_default = DEFAULT_LABELS[self.kind]
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "raw", raw)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "x_label", self.x_label or x_default)
        object.__setattr__(self, "y_label", self.y_label or y_default)


def dry_run_text(spec: FigureSpec) -> str:
    """The plotted columns, byte for byte as they sit in the input CSVs.

    One block per (file, column): a '# file=... column=...' marker line
    followed by the raw cell per row.
    """
    blocks = []
    for path in spec.inputs:
        for name in PLOTTED[spec.kind]:
            body = "\n".join(spec.raw[path][name])
            blocks.append(f"# file={path} column={name}\n{body}")
    return "\n".join(blocks) + "\n"
