import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=30, deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)



@pytest.fixture(scope="session")
def optimized_pulse():
    """Optimised CZ waveform shared by the pulse and tomography tests."""
    from lcsim.pulse import optimizer

    return optimizer.optimize(max_iters=400)
