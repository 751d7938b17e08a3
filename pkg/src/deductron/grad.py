"""Continuous-weight training: backpropagation through time and Adam."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ._kernels import memory_scan_adjoint
from .dataset import WindowSeq
from .network import CONTINUOUS, RISING, DeductronParams, forward

PARAM_NAMES = ("W1", "b1", "W2", "b2")


@dataclass(frozen=True, eq=False)
class GradientSet:
    dW1: np.ndarray
    db1: np.ndarray
    dW2: np.ndarray
    db2: np.ndarray
    loss_value: float

    def as_dict(self) -> dict[str, np.ndarray]:
        return {"W1": self.dW1, "b1": self.db1, "W2": self.dW2, "b2": self.db2}


def backward(params: DeductronParams, x, targets, update_first: bool = True) -> GradientSet:
    """Gradient of sum((t - o)^2) for the continuous (logistic) network.

    Shared input/output weights accumulate over every frame; the memory
    recurrence is differentiated exactly.
    """
    if params.mode != CONTINUOUS:
        raise ValueError("backward needs continuous parameters; convert with quantized_to_continuous")
    x = np.asarray(x, dtype=float)
    t = np.asarray(targets, dtype=float)
    tr = forward(params, RISING, x, update_first=update_first)
    if t.shape != tr.o.shape:
        raise ValueError(f"targets {t.shape} do not match outputs {tr.o.shape}")
    err = tr.o - t
    # o = 1 - sigma(a2)  =>  do/da2 = -o (1 - o)
    da2 = -2.0 * err * tr.o * (1.0 - tr.o)
    dW2 = da2.T @ tr.z
    db2 = da2.sum(axis=0)
    dz = da2 @ params.W2
    du, dv = memory_scan_adjoint(np.ascontiguousarray(tr.u), np.ascontiguousarray(tr.v), tr.z,
                                 np.ascontiguousarray(dz), update_first)
    dh = np.concatenate([du, dv], axis=1)
    da1 = dh * tr.h * (1.0 - tr.h)
    dW1 = da1.T @ x
    db1 = da1.sum(axis=0)
    return GradientSet(dW1, db1, dW2, db2, float(np.sum(err ** 2)))


def continuous_loss(params: DeductronParams, x, targets, update_first: bool = True) -> float:
    o = forward(params, RISING, x, update_first=update_first).o
    return float(np.sum((np.asarray(targets, dtype=float) - o) ** 2))


@dataclass
class AdamState:
    alpha: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(state: AdamState, params: DeductronParams, grads: GradientSet,
              clip: float | None = None) -> tuple[AdamState, DeductronParams]:
    """One bias-corrected Adam update; returns new (state, params)."""
    g_all = grads.as_dict()
    t = state.step + 1
    m_new, v_new, updated = {}, {}, {}
    for k in PARAM_NAMES:
        g = g_all[k]
        if clip is not None:
            g = np.clip(g, -clip, clip)
        m = state.m.get(k, np.zeros_like(g))
        v = state.v.get(k, np.zeros_like(g))
        m = state.beta1 * m + (1 - state.beta1) * g
        v = state.beta2 * v + (1 - state.beta2) * g * g
        m_hat = m / (1 - state.beta1 ** t)
        v_hat = v / (1 - state.beta2 ** t)
        updated[k] = getattr(params, k) - state.alpha * m_hat / (np.sqrt(v_hat) + state.epsilon)
        m_new[k], v_new[k] = m, v
    new_state = replace(state, step=t, m=m_new, v=v_new)
    return new_state, DeductronParams(updated["W1"], updated["b1"], updated["W2"], updated["b2"], params.mode)


@dataclass(frozen=True)
class SGDConfig:
    alpha: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    epochs: int = 20000
    seed: int = 0
    init_scale: float = 1.0
    clip: float | None = None
    stop_when_perfect: bool = False
    check_every: int = 50


@dataclass(frozen=True, eq=False)
class SGDResult:
    params: DeductronParams
    losses: np.ndarray
    accuracy: float
    epochs_run: int
    seed: int


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, value: float):
        super().__init__(f"loss became {value} at epoch {epoch}")
        self.epoch = epoch


def random_continuous(shape, rng: np.random.Generator, scale: float = 1.0) -> DeductronParams:
    n_in, m, n_out = shape
    return DeductronParams(
        rng.uniform(-scale, scale, (2 * m, n_in)), rng.uniform(-scale, scale, 2 * m),
        rng.uniform(-scale, scale, (n_out, m)), rng.uniform(-scale, scale, n_out),
        CONTINUOUS,
    )


def thresholded_accuracy(params: DeductronParams, data: WindowSeq) -> float:
    o = forward(params, RISING, data.windows).o
    return float(np.mean((o > 0.5) == data.targets.astype(bool)))


def train_sgd(train: WindowSeq, shape, config: SGDConfig = SGDConfig(),
              init: DeductronParams | None = None) -> SGDResult:
    """Full-sequence Adam training; ``losses[k]`` is the loss before update k.

    With ``stop_when_perfect`` training stops at the first check where the
    thresholded outputs match every target.
    """
    if len(train) == 0:
        raise ValueError("empty training set")
    rng = np.random.default_rng(config.seed)
    params = init if init is not None else random_continuous(shape, rng, config.init_scale)
    if params.mode != CONTINUOUS:
        raise ValueError("initial parameters must be continuous")
    x = train.windows.astype(float)
    t = train.targets.astype(float)
    state = AdamState(config.alpha, config.beta1, config.beta2, config.epsilon)
    losses = []
    for epoch in range(config.epochs):
        g = backward(params, x, t)
        if not np.isfinite(g.loss_value):
            raise TrainingDiverged(epoch, g.loss_value)
        losses.append(g.loss_value)
        if (config.stop_when_perfect and epoch % config.check_every == 0
                and thresholded_accuracy(params, train) == 1.0):
            break
        state, params = adam_step(state, params, g, config.clip)
    return SGDResult(params, np.array(losses), thresholded_accuracy(params, train), len(losses), config.seed)
