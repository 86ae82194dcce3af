import numpy as np
import pytest


@pytest.fixture(scope="session", autouse=True)
def warm_jit_kernels():
    # Load (or build) the numba kernels once, outside any timed assertion.
    from cfikit.codec import rs255

    rs = rs255()
    msg = np.zeros(32, dtype=np.uint8)
    rs.decode(rs.encode(msg))
    yield
