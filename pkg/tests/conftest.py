from __future__ import annotations

import functools

import pytest

from resilisim.scenario import build_scenario, cbbp_document, load_builtin
from resilisim.simulation import RunResult, Simulation


@functools.lru_cache(maxsize=None)
def _builtin_run(name: str, seed: int | None) -> RunResult:
    return Simulation(load_builtin(name), seed=seed).run()


@pytest.fixture
def builtin_run():
    """Run a shipped scenario once per session and share the result."""
    return lambda name, seed=None: _builtin_run(name, seed)


def run_doc(faults=None, **overrides) -> RunResult:
    return Simulation(build_scenario(cbbp_document("test", faults, **overrides))).run()
