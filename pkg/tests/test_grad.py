import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import basic_sample
from deductron.dataset import make_dataset
from deductron.grad import (AdamState, GradientSet, SGDConfig, adam_step, backward, continuous_loss,
                            random_continuous, thresholded_accuracy, train_sgd)
from deductron.network import CONTINUOUS, DeductronParams, quantized_to_continuous


def numeric_grad(params, x, t, h=1e-6):
    theta = params.flat()
    g = np.zeros_like(theta)
    for k in range(len(theta)):
        e = np.zeros_like(theta)
        e[k] = h
        up = DeductronParams.from_flat(theta + e, params.shape, CONTINUOUS)
        dn = DeductronParams.from_flat(theta - e, params.shape, CONTINUOUS)
        g[k] = (continuous_loss(up, x, t) - continuous_loss(dn, x, t)) / (2 * h)
    return g


def flat_grad(g: GradientSet):
    return np.concatenate([g.dW1.ravel(), g.dW2.ravel(), g.db1, g.db2])


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2, 29]))
def test_gradient_matches_finite_differences(seed, n):
    rng = np.random.default_rng(seed)
    p = random_continuous((6, 3, 2), rng)
    x = rng.integers(0, 2, (n, 6)).astype(float)
    t = rng.integers(0, 2, (n, 2)).astype(float)
    g = backward(p, x, t)
    assert g.loss_value == pytest.approx(continuous_loss(p, x, t))
    num = numeric_grad(p, x, t)
    err = np.max(np.abs(flat_grad(g) - num)) / max(1.0, np.max(np.abs(num)))
    assert err < 1e-4


def test_gradient_zero_at_perfect_fit(handcrafted, fig4_data):
    q = quantized_to_continuous(handcrafted, 40.0)
    g = backward(q, fig4_data.windows, fig4_data.targets)
    assert g.loss_value < 1e-10
    assert np.max(np.abs(flat_grad(g))) < 1e-6


def test_backward_rejects_quantized(handcrafted, fig4_data):
    with pytest.raises(ValueError):
        backward(handcrafted, fig4_data.windows, fig4_data.targets)


def test_adam_first_step_moves_by_alpha():
    rng = np.random.default_rng(0)
    p = random_continuous((2, 1, 1), rng)
    g = GradientSet(np.array([[1.0, -2.0], [0.0, 3.0]]), np.array([0.5, -0.5]),
                    np.array([[4.0]]), np.array([-1e-3]), 0.0)
    state, q = adam_step(AdamState(alpha=0.01), p, g)
    assert state.step == 1
    # bias-corrected first step is alpha * sign(g) (up to epsilon)
    for k, gk in g.as_dict().items():
        expected = getattr(p, k) - 0.01 * gk / (np.abs(gk) + 1e-8)
        np.testing.assert_allclose(getattr(q, k), expected, rtol=1e-6)


def test_adam_second_step_by_hand():
    p = DeductronParams([[0.0], [0.0]], [0.0, 0.0], [[0.0]], [0.0], CONTINUOUS)
    g1 = GradientSet(np.array([[1.0], [1.0]]), np.ones(2), np.array([[1.0]]), np.ones(1), 0.0)
    g2 = GradientSet(np.array([[3.0], [3.0]]), 3 * np.ones(2), np.array([[3.0]]), 3 * np.ones(1), 0.0)
    s, p = adam_step(AdamState(alpha=0.1), p, g1)
    s, p = adam_step(s, p, g2)
    m = (0.9 * 0.1 * 1 + 0.1 * 3) / (1 - 0.9 ** 2)
    v = (0.999 * 0.001 * 1 + 0.001 * 9) / (1 - 0.999 ** 2)
    expected = -0.1 - 0.1 * m / (np.sqrt(v) + 1e-8)
    assert p.b2[0] == pytest.approx(expected)


def test_short_training_reduces_loss(fig4_data):
    r = train_sgd(fig4_data, (6, 4, 2), SGDConfig(epochs=300, alpha=1e-2, seed=1))
    assert r.epochs_run == 300 and len(r.losses) == 300
    assert r.losses[-1] < 0.5 * r.losses[0]
    assert r.seed == 1


def test_stop_when_perfect_from_handcrafted(handcrafted, fig4_data):
    init = quantized_to_continuous(handcrafted, 10.0)
    r = train_sgd(fig4_data, (6, 4, 2), SGDConfig(epochs=100, stop_when_perfect=True), init=init)
    assert r.epochs_run == 1 and r.accuracy == 1.0
    assert thresholded_accuracy(r.params, fig4_data) == 1.0


def test_train_sgd_checks(fig4_data, handcrafted):
    with pytest.raises(ValueError):
        train_sgd(fig4_data, (6, 4, 2), SGDConfig(epochs=1), init=handcrafted)


def test_sgd_is_deterministic():
    data = make_dataset(basic_sample(2, 60))
    a = train_sgd(data, (6, 2, 2), SGDConfig(epochs=50, seed=4))
    b = train_sgd(data, (6, 2, 2), SGDConfig(epochs=50, seed=4))
    np.testing.assert_array_equal(a.losses, b.losses)
