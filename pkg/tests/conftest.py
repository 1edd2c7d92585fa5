"""Shared fixtures: the heavy preset ensembles run once per session."""

import time

import pytest

from zeemem.config import build_preset
from zeemem.ensemble import run_ensemble


def _run_preset(name):
    config = build_preset(name)
    start = time.perf_counter()
    result = run_ensemble(
        config.scheme,
        config.sequence(),
        config.environment,
        config.storage_seconds(),
        config.integrator,
        config.units,
        combine=config.combine,
    )
    elapsed = time.perf_counter() - start
    return config, result, elapsed


@pytest.fixture(scope="session")
def fig4_run():
    return _run_preset("fig4")


@pytest.fixture(scope="session")
def fig5_run():
    return _run_preset("fig5")


@pytest.fixture(scope="session")
def fig6_run():
    return _run_preset("fig6")
