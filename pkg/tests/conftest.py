import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from tactisim.estimator import Mode, ModelConfig, random_weights
from tactisim.traces import synth_trace

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures")

TINY_CONFIG = ModelConfig(window_len=8, conv_width=3, conv_filters=2,
                          lstm_units=2, d_model=2, n_heads=1, d_head=2,
                          ffn_hidden=4, fuse_hidden=3)


@pytest.fixture(scope="session")
def tiny_config():
    return TINY_CONFIG


@pytest.fixture(scope="session")
def tiny_weights():
    return random_weights(TINY_CONFIG, Mode.MULTI_MODAL, seed=7)


@pytest.fixture(scope="session")
def press_trace():
    return synth_trace(0.5, 0.5, 1e-3, 8000, "press", seed=11)


@pytest.fixture(scope="session")
def push_trace():
    return synth_trace(0.5, 0.8, 1e-3, 8000, "push", seed=5)
