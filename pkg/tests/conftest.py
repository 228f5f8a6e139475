from __future__ import annotations

import numpy as np
import pytest

from acceptance_log import LINES as ACCEPTANCE_LINES
from su2synth.solver import SolverConfig, load_field, save_field, solve



@pytest.fixture(scope="session")
def coarse_field():
    """h = 0.2 on [-2, 2]^3; solves in well under a second."""
    return solve(SolverConfig(h=0.2, R=2.0, tol=1e-8))


@pytest.fixture(scope="session")
def small_field():
    return solve(SolverConfig(h=0.1, R=0.5, tol=1e-6))


@pytest.fixture(scope="session")
def field_file(tmp_path_factory):
    """The acceptance configuration (h = 0.1, R = 3, 16 directions), on disk."""
    path = tmp_path_factory.mktemp("field") / "field.bin"
    save_field(solve(SolverConfig(h=0.1, R=3.0, n_dir=16, tol=1e-6)), path)
    return path


@pytest.fixture(scope="session")
def fine_field(field_file):
    return load_field(field_file)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
