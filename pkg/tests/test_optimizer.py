import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simembed.errors import DimensionMismatch, InvalidParameter
from simembed.optimizer import AdamState, adam_step


def scalar_adam(grads, x0, lr, b1=0.9, b2=0.999, eps=1e-8):
    """Published update equations, one scalar at a time."""
    x, m, v, out = x0, 0.0, 0.0, []
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh, vh = m / (1 - b1**t), v / (1 - b2**t)
        x = x - lr * mh / (math.sqrt(vh) + eps)
        out.append(x)
    return out


def test_defaults():
    s = AdamState((2,))
    assert (s.beta1, s.beta2, s.eps, s.t) == (0.9, 0.999, 1e-8, 0)


def test_zero_gradient_keeps_params(rng):
    p = rng.normal(size=(3, 2))
    s = AdamState(p.shape)
    for _ in range(50):
        p_new = adam_step(p, np.zeros_like(p), s, 1e-3)
        assert np.array_equal(p_new, p)
    assert s.t == 50


def test_first_step():
    s = AdamState(())
    x = adam_step(0.0, 1.0, s, 1e-3)
    assert float(x) == pytest.approx(-0.001, rel=1e-7)


def test_five_step_trace_matches_scalar_oracle():
    grads = [0.5, -1.2, 3.0, 0.1, -0.7]
    s = AdamState(())
    x, got = 0.3, []
    for g in grads:
        x = adam_step(x, g, s, 0.01)
        got.append(float(x))
    np.testing.assert_allclose(got, scalar_adam(grads, 0.3, 0.01), rtol=1e-15, atol=1e-17)


def test_elementwise_independence(rng):
    G = rng.normal(size=(6, 2, 3))
    p, s = np.zeros((2, 3)), AdamState((2, 3))
    for g in G:
        p = adam_step(p, g, s, 0.05)
    for i in range(2):
        for j in range(3):
            assert p[i, j] == pytest.approx(scalar_adam(G[:, i, j].tolist(), 0.0, 0.05)[-1], rel=1e-13)


@settings(max_examples=40)
@given(st.floats(-1e3, 1e3).filter(lambda g: abs(g) > 1e-6), st.integers(1, 60), st.floats(1e-5, 1.0))
def test_constant_gradient_step_bound(g, steps, lr):
    # for a gradient of constant sign and size, m_hat / sqrt(v_hat) == sign(g) exactly up to rounding
    s, x = AdamState(()), 0.0
    for _ in range(steps):
        x_new = float(adam_step(x, g, s, lr))
        assert abs(x_new - x) <= lr * (1 + 1e-9)
        x = x_new


def test_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        adam_step(np.zeros(3), np.zeros(4), AdamState((3,)), 1e-3)


@pytest.mark.parametrize("lr", [0.0, -1e-3])
def test_bad_lr(lr):
    with pytest.raises(InvalidParameter):
        adam_step(np.zeros(2), np.zeros(2), AdamState((2,)), lr)


def test_bad_betas():
    with pytest.raises(InvalidParameter):
        AdamState((2,), beta1=1.0)
