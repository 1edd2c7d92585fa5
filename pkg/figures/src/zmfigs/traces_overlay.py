"""Overlay every retrieved pulse at its absolute time origin."""

from .script import run


def main(argv=None) -> int:
    return run(
        "traces_overlay",
        "zmfig-traces",
        "Overlay retrieved pulses, each offset by its storage time.",
        argv,
    )


if __name__ == "__main__":
    raise SystemExit(main())
