import numpy as np
import pytest

from backflow import ChainParams, TimeGrid, build_chain_model, run_trajectory


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def chain10_model():
    return build_chain_model(ChainParams(n_total=10))


@pytest.fixture(scope="session")
def chain10_record(chain10_model):
    # the default figure run; shared because it costs about a second
    grid = TimeGrid(t_max=9.0, n_steps=2000)
    return run_trajectory(chain10_model, grid, path="subspace")


@pytest.fixture(scope="session")
def chain6_records():
    model = build_chain_model(ChainParams(n_total=6))
    grid = TimeGrid(t_max=5.0, n_steps=300)
    dense = run_trajectory(model, grid, path="dense")
    subspace = run_trajectory(model, grid, path="subspace")
    return model, dense, subspace


@pytest.fixture()
def rng():
    return np.random.default_rng(11)
