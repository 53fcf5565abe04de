import os

# keep BLAS single-threaded so the process-level MC workers do not thrash
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

import numpy as np  # noqa: E402  (import after the env guard)
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20140213)
