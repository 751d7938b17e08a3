import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deductron.lstm import LstmParams, lstm_forward


def test_zero_network_outputs_zero():
    c, h = lstm_forward(LstmParams.zeros(6, 4), np.random.default_rng(0).integers(0, 2, (50, 6)))
    assert np.all(h == 0) and np.all(c == 0)


def test_single_step_example():
    p = LstmParams.zeros(1, 1).replace(W_i=[[1.0]], W_c=[[1.0]])
    c, h = lstm_forward(p, [[1.0]])
    sig1 = 1 / (1 + math.exp(-1))
    assert c[0, 0] == pytest.approx(sig1 * math.tanh(1), abs=1e-12)
    assert c[0, 0] == pytest.approx(0.556770, abs=1e-4)
    assert h[0, 0] == pytest.approx(0.5 * math.tanh(c[0, 0]), abs=1e-12)


def test_two_steps_by_hand():
    p = LstmParams.zeros(1, 1).replace(W_c=[[1.0]], U_f=[[1.0]])
    c, _ = lstm_forward(p, [[1.0], [1.0]])
    c1 = 0.5 * math.tanh(1)
    f2 = 1 / (1 + math.exp(-c1))
    assert c[1, 0] == pytest.approx(f2 * c1 + 0.5 * math.tanh(1), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_outputs_bounded(seed):
    rng = np.random.default_rng(seed)
    p = LstmParams.zeros(3, 2)
    p = p.replace(**{k: rng.normal(size=getattr(p, k).shape) for k in
                     ("W_f", "W_i", "W_o", "W_c", "U_f", "U_i", "U_o", "b_f", "b_i", "b_o", "b_c")})
    c, h = lstm_forward(p, rng.normal(size=(40, 3)))
    # |c_t| <= |c_{t-1}| + 1, and |h| < 1
    assert np.all(np.abs(c) <= np.arange(1, 41)[:, None])
    assert np.all(np.abs(h) < 1)
    assert LstmParams.from_json(p.to_json()).W_f.tolist() == p.W_f.tolist()


def test_shape_checks():
    with pytest.raises(ValueError):
        LstmParams.zeros(2, 2).replace(U_f=np.zeros((2, 3)))
    with pytest.raises(ValueError):
        lstm_forward(LstmParams.zeros(2, 2), np.zeros((3, 4)))
    with pytest.raises(ValueError):
        LstmParams.from_json('{"format": "other/1"}')
