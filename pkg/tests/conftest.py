"""Shared test session setup.

The suite runs thousands of small factorizations; multithreaded BLAS
worker synchronization costs far more than the linear algebra itself on
small matrices (observed ~30x slowdowns on 2-core runners), so BLAS is
pinned to one thread for the whole session.
"""

import os

os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")

try:
    import threadpoolctl

    _BLAS_LIMIT = threadpoolctl.threadpool_limits(limits=1, user_api="blas")
except ImportError:  # the env vars above still cover a fresh interpreter
    _BLAS_LIMIT = None
