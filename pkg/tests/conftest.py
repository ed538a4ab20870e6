import numpy as np
import pytest


@pytest.fixture(autouse=True)
def _no_nan_warnings():
    old = np.seterr(all="ignore")
    yield
    np.seterr(**old)
