import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deductron import _kernels
from deductron.anneal import (AnnealSchedule, anneal, anneal_runs, evaluate_accuracy, hard_loss,
                              propose)
from deductron.network import (BIAS_VALUES, HARD, WEIGHT_VALUES, DeductronParams, falling, loss,
                               n_parameters, outputs, random_quantized)

SHORT = AnnealSchedule(beta_step=1e-3, log_every=100)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([-1.0, 0.0, 2.0, 10.0]), st.sampled_from([1, 2]),
       st.booleans())
def test_kernel_loss_matches_network(seed, beta, gamma, update_first):
    rng = np.random.default_rng(seed)
    p = random_quantized((6, 3, 2), rng)
    x = rng.integers(0, 2, (20, 6)).astype(float)
    t = rng.integers(0, 2, (20, 2)).astype(float)
    act = HARD if beta < 0 else falling(beta)
    # integer pre-activations never sit on the 0.5 threshold
    expected = loss(outputs(p, x, act, update_first=update_first), t, gamma)
    got = _kernels.sequence_loss(p.flat(), x, t, 6, 3, 2, beta, gamma, update_first)
    assert got == pytest.approx(expected, abs=1e-9)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_propose_changes_one_value(seed, weights_only):
    rng = np.random.default_rng(seed)
    p = random_quantized((6, 3, 2), rng)
    q = propose(p, rng, weights_only)
    diff = np.flatnonzero(p.flat() != q.flat())
    assert len(diff) == 1
    n_w, _ = n_parameters(*p.shape)
    if weights_only:
        assert diff[0] < n_w
    domain = WEIGHT_VALUES if diff[0] < n_w else BIAS_VALUES
    assert q.flat()[diff[0]] in domain


def test_schedule_checks():
    assert AnnealSchedule().n_iterations == 1_000_000
    assert AnnealSchedule().effective_stuck_limit == 20000
    assert AnnealSchedule(beta_step=1e-4).effective_stuck_limit == 2000
    assert AnnealSchedule(stuck_limit=7).effective_stuck_limit == 7
    for bad in (dict(beta_step=0), dict(beta_start=11), dict(gamma=3), dict(acceptance="tabu"),
                dict(stuck_limit=0)):
        with pytest.raises(ValueError):
            AnnealSchedule(**bad)


def test_anneal_is_deterministic(fig4_data):
    a = anneal(fig4_data, (6, 3, 2), SHORT)
    b = anneal(fig4_data, (6, 3, 2), SHORT)
    assert a.best_params == b.best_params and a.best_loss == b.best_loss
    np.testing.assert_array_equal(a.loss_history, b.loss_history)


def test_anneal_result_consistency(fig4_data):
    r = anneal(fig4_data, (6, 3, 2), SHORT)
    assert r.iterations == 10000
    assert r.best_loss == hard_loss(r.best_params, fig4_data)
    best_col = r.loss_history[:, 3]
    assert np.all(np.diff(best_col) <= 0)
    assert r.loss_history[:, 0].tolist() == list(range(100, 10001, 100))
    init = random_quantized((6, 3, 2), np.random.default_rng(0))
    assert r.best_loss <= hard_loss(init, fig4_data)


def test_anneal_keeps_perfect_start(fig4_data, handcrafted):
    r = anneal(fig4_data, (6, 4, 2), SHORT, init=handcrafted)
    assert r.best_loss == 0


def test_tied_biases(fig4_data):
    r = anneal(fig4_data, (6, 3, 2), AnnealSchedule(beta_step=1e-3, tied_bias=True, seed=3))
    p = r.best_params
    np.testing.assert_array_equal(p.b1, np.minimum((p.W1 == -1).sum(axis=1), 5))
    np.testing.assert_array_equal(p.b2, np.minimum((p.W2 == -1).sum(axis=1), 5))


def test_greedy_acceptance_runs(fig4_data):
    r = anneal(fig4_data, (6, 3, 2), AnnealSchedule(beta_step=1e-3, acceptance="greedy"))
    assert np.isfinite(r.best_loss)


def test_anneal_shape_checks(fig4_data, handcrafted):
    with pytest.raises(ValueError):
        anneal(fig4_data, (5, 3, 2), SHORT)
    with pytest.raises(ValueError):
        anneal(fig4_data, (6, 3, 2), SHORT, init=handcrafted)


def test_anneal_runs_winner(fig4_data):
    sched = AnnealSchedule(beta_step=2e-3)
    best, results = anneal_runs(fig4_data, (6, 3, 2), sched, [0, 1, 2], threads=1)
    losses = [r.best_loss for r in results]
    assert best.seed == [0, 1, 2][losses.index(min(losses))]
    best2, results2 = anneal_runs(fig4_data, (6, 3, 2), sched, [0, 1, 2], threads=2)
    assert [r.best_params for r in results2] == [r.best_params for r in results]


def test_evaluate_accuracy_all_zero(fig4_data):
    p = DeductronParams(np.zeros((6, 6)), np.zeros(6), np.zeros((2, 3)), np.zeros(2))
    acc = evaluate_accuracy(p, None, fig4_data)
    assert acc.accuracy == pytest.approx(6 / 58)
    assert acc.frame_accuracy == 0.0
    assert not acc.text_match
    assert acc.confusion[0] == {"tp": 3, "fp": 26, "fn": 0, "tn": 0}


def test_evaluate_accuracy_handcrafted(handcrafted, fig4_data):
    acc = evaluate_accuracy(handcrafted, HARD, fig4_data)
    assert acc.accuracy == 1.0 and acc.text_match and acc.emitted == "XOOXXO"
