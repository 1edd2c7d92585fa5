"""Peak intensity versus storage time with a fitted decay curve."""

from .script import run


def main(argv=None) -> int:
    return run(
        "envelope",
        "zmfig-envelope",
        "Plot the peak-intensity envelope and its fitted decay; a second input adds a panel.",
        argv,
    )


if __name__ == "__main__":
    raise SystemExit(main())
