import numpy as np
import pytest

from fgfield.domain.services import bumps
from fgfield.domain.validators.run_config import RunConfig
from fgfield.infrastructure.logging import configure_logging
from fgfield.infrastructure.monitoring import PerformanceMetrics

TEST_SEED = 7


@pytest.fixture(autouse=True)
def reset_metrics():
    """Every test starts with an empty metrics registry."""
    PerformanceMetrics().reset()
    yield
    PerformanceMetrics().reset()


@pytest.fixture(autouse=True)
def restore_logging():
    """Rebind the log handler to the session stream after tests that reconfigure logging."""
    yield
    configure_logging()


@pytest.fixture
def make_config():
    """Factory for seeded run configurations."""
    def _make(**overrides) -> RunConfig:
        data = {"seed": TEST_SEED, "n": 64, "d": 1, "box_length": 1.0}
        data.update(overrides)
        return RunConfig(**data)
    return _make


@pytest.fixture
def run_config(make_config):
    return make_config()


@pytest.fixture
def gaussian_phi():
    """Δ of a unit Gaussian on the line: moments of order 0 and 1 vanish."""
    return bumps.gaussian_test_function(1, j=1, sigma=1.0, n=129)


@pytest.fixture
def odd_phi():
    """x·exp(-x²/2) on the line: zero mass."""
    return bumps.odd_test_function(1, sigma=1.0, n=129)


@pytest.fixture
def brownian_points():
    return np.round(np.arange(1, 11) / 10.0, 12)[:, None]
