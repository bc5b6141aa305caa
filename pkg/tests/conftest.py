import numpy as np
import pytest

from beatfield.synth import beat_train


@pytest.fixture(scope="session")
def clean_train():
    """Deterministic 10-beat train at 1 Hz, 250 Hz sampling."""
    return beat_train(rate=250.0, duration=10.0, heart_rate_bpm=60.0)


@pytest.fixture(scope="session")
def long_train():
    """Longer jitter-free train for feature tests."""
    return beat_train(rate=250.0, duration=14.0, heart_rate_bpm=72.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
