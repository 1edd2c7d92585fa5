"""End-to-end check against real simulator preset outputs.

The simulator is driven through its command line only, and its CSVs are
consumed purely via the documented column contract.
"""

import subprocess
import sys

import pytest

from zmfigs import PLOTTED
from zmfigs.classical import main as classical_main
from zmfigs.envelope import main as envelope_main
from zmfigs.sweep_line import main as sweep_main
from zmfigs.traces_overlay import main as traces_main


def _preset(name, out_dir, *extra):
    cmd = [sys.executable, "-m", "zeemem.cli", "preset", name,
           "--out", str(out_dir), "--quiet", *extra]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return out_dir


@pytest.fixture(scope="session")
def preset_outputs(tmp_path_factory):
    base = tmp_path_factory.mktemp("preset_outputs")
    _preset("fig4", base / "fig4", "--samples", "3")
    _preset("fig3", base / "fig3")
    _preset("fig7", base / "fig7")
    return base


def _raw_column(path, name):
    lines = path.read_text().splitlines()
    idx = lines[0].split(",").index(name)
    return "\n".join(line.split(",")[idx] for line in lines[1:] if line.strip())


def _check_dry_run(entry, kind, paths):
    argv = ["--in", *[str(p) for p in paths], "--dry-run"]
    import io
    from contextlib import redirect_stdout

    buf = io.StringIO()
    with redirect_stdout(buf):
        assert entry(argv) == 0
    text = buf.getvalue()
    for path in paths:
        for name in PLOTTED[kind]:
            expected = f"# file={path} column={name}\n{_raw_column(path, name)}\n"
            assert expected in text, f"{kind}: column {name} of {path} not echoed verbatim"


def test_09_all_figure_kinds_from_preset_outputs(preset_outputs, tmp_path, capsys):
    jobs = [
        (traces_main, "traces_overlay", [preset_outputs / "fig4" / "traces.csv"]),
        (envelope_main, "envelope", [preset_outputs / "fig4" / "peaks.csv"]),
        (sweep_main, "sweep_line", [preset_outputs / "fig3" / "sweep.csv"]),
        (
            classical_main,
            "classical",
            [
                preset_outputs / "fig7" / "classical_none.csv",
                preset_outputs / "fig7" / "classical_x.csv",
                preset_outputs / "fig7" / "classical_z.csv",
                preset_outputs / "fig7" / "classical_y.csv",
            ],
        ),
    ]

    rendered = 0
    for entry, kind, paths in jobs:
        for fmt in ("png", "svg"):
            out = tmp_path / f"{kind}.{fmt}"
            argv = ["--in", *[str(p) for p in paths], "--out", str(out), "--format", fmt]
            assert entry(argv) == 0, f"{kind} failed to render {fmt}"
            assert out.stat().st_size > 500
            rendered += 1
        _check_dry_run(entry, kind, paths)

    with capsys.disabled():
        print(
            f"[PASS] figure pipeline: {rendered} images across 4 kinds, "
            "dry-run columns byte-identical"
        )
