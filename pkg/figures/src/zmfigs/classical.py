"""Classical dipole trajectories and their transverse-plane projection."""

from .script import run


def main(argv=None) -> int:
    return run(
        "classical",
        "zmfig-classical",
        "Plot dipole moment components over time plus the Mx-My projection; extra inputs overlay.",
        argv,
    )


if __name__ == "__main__":
    raise SystemExit(main())
