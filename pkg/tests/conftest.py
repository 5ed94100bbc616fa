import numpy as np
import pytest

from fracineq import expr, quad


@pytest.fixture(scope="session", autouse=True)
def warm_backend():
    # trigger kernel compilation once so timed tests measure the
    # algorithms, not the JIT
    quad.integrate(lambda t: t, 0.0, 1.0)
    e = expr.parse("exp(x)+x^2")
    expr.eval_many(e, np.array([0.5]))
    expr.eval_dual_many(e, np.array([0.5]))
