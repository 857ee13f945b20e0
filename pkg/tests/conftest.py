import numpy as np
import pytest

from gdtree import ForwardMode, loss_and_gradients
from gdtree.losses import LossConfig
from gdtree.training import init_params


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger JIT compilation once so timed tests measure math, not compile."""
    rng = np.random.default_rng(0)
    params = init_params(2, 3, 2, rng)
    X = rng.normal(size=(4, 3))
    y = np.array([0, 1, 0, 1])
    for mode in (ForwardMode.HARD, ForwardMode.SOFT):
        loss_and_gradients(params, X, y, LossConfig(), mode)
