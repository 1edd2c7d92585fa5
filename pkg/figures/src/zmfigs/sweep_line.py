"""Extracted frequency versus field magnitude with a fitted line."""

from .script import run


def main(argv=None) -> int:
    return run(
        "sweep_line",
        "zmfig-sweep",
        "Plot frequency against field magnitude with a least-squares line and slope annotation.",
        argv,
    )


if __name__ == "__main__":
    raise SystemExit(main())
