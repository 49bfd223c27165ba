import numpy as np
import pytest

from egl.model import beta_feature_model, demo_block_model


@pytest.fixture(scope="session")
def demo():
    return demo_block_model()


@pytest.fixture(scope="session")
def beta_fm():
    return beta_feature_model()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def surrogate():
    """One draw from the three-block sparse model with block sizes 118/83/78."""
    from egl.config import DEFAULTS, block_model
    from egl.sim import sample_sbm

    bm = block_model(DEFAULTS["celegans"]["surrogate"])
    return sample_sbm(bm, seed=7, counts=[118, 83, 78])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
