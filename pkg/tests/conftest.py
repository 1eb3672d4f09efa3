import numpy as np
import pytest

from orthospec import SensingSpec, make_rng, make_signal


@pytest.fixture
def rng():
    return make_rng(1234, "tests")


@pytest.fixture(params=["haar", "cdp", "partial_dft"])
def small_op(request):
    """One small operator per ensemble, n in the tens, delta = 2."""
    kind = request.param
    if kind == "cdp":
        spec = SensingSpec(kind="cdp", n=48, seed=7, blocks=2)
    else:
        spec = SensingSpec(kind=kind, n=48, seed=7, delta=2.0)
    return spec.build()


@pytest.fixture
def small_signal(small_op):
    return make_signal(small_op, make_rng(99, "tests/signal"))


def dense_matrix(op):
    """A as an explicit array, column by column."""
    a = np.empty((op.m, op.n), dtype=complex)
    e = np.zeros(op.n, dtype=complex)
    for j in range(op.n):
        e[j] = 1.0
        a[:, j] = op.apply(e)
        e[j] = 0.0
    return a
