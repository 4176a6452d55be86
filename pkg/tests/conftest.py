import numpy as np
import pytest

from leobeam import SystemConfig, build_system


def desk_config(**kw):
    """Small but non-trivial setup: 2 satellites, 4 terminals, 4x4 panels, 4 RF chains."""
    base = dict(num_sats=2, num_uts=4, num_rfc=4, panel_dims=(4, 4))
    base.update(kw)
    return SystemConfig(**base)


def random_psd(rng, n, rank=None, scale=1.0):
    rank = n if rank is None else rank
    x = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    return scale * (x @ x.conj().T) / rank


def crandn(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


@pytest.fixture
def desk():
    return build_system(desk_config(), 3)


@pytest.fixture
def table1():
    return build_system(SystemConfig(), 0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
