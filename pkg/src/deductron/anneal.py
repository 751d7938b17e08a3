"""Simulated annealing over quantized deductron parameters."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .dataset import WindowSeq
from .decoder import emitted_text
from .network import (BIAS_VALUES, HARD, QUANTIZED, WEIGHT_VALUES, Activation, DeductronParams,
                      n_parameters, outputs, random_quantized)


@dataclass(frozen=True)
class AnnealSchedule:
    beta_start: float = 0.0
    beta_end: float = 10.0
    beta_step: float = 1e-5
    stuck_limit: int | None = None  # default: 2% of the schedule length
    gamma: int = 1
    seed: int = 0
    acceptance: str = "metropolis"  # or "greedy"
    tied_bias: bool = False
    beta_ref: float = 10.0  # tie-break among equal hard losses
    log_every: int = 1000
    update_first: bool = True

    def __post_init__(self):
        if not self.beta_step > 0:
            raise ValueError("beta_step must be positive")
        if self.beta_start > self.beta_end:
            raise ValueError("beta_start must not exceed beta_end")
        if self.gamma not in (1, 2):
            raise ValueError("gamma must be 1 or 2")
        if self.stuck_limit is not None and self.stuck_limit < 1:
            raise ValueError("stuck_limit must be positive")
        if self.acceptance not in ("metropolis", "greedy"):
            raise ValueError(f"unknown acceptance rule {self.acceptance!r}")

    @property
    def n_iterations(self) -> int:
        return int(round((self.beta_end - self.beta_start) / self.beta_step))

    @property
    def effective_stuck_limit(self) -> int:
        if self.stuck_limit is not None:
            return self.stuck_limit
        return max(1000, self.n_iterations // 50)

    def betas(self, start: int, stop: int) -> np.ndarray:
        return self.beta_start + self.beta_step * np.arange(start, stop, dtype=float)


@dataclass(frozen=True, eq=False)
class AnnealResult:
    best_params: DeductronParams
    best_loss: float
    iterations: int
    restarts: int
    seed: int
    # rows of (iteration, beta, current_loss, best_loss)
    loss_history: np.ndarray = field(repr=False)


def propose(params: DeductronParams, rng: np.random.Generator, weights_only: bool = False) -> DeductronParams:
    """Change exactly one weight or bias to a different admissible value."""
    if params.mode != QUANTIZED:
        raise ValueError("propose needs quantized parameters")
    theta = params.flat()
    n_w, n_b = n_parameters(*params.shape)
    p = int(rng.integers(n_w if weights_only else n_w + n_b))
    domain = WEIGHT_VALUES if p < n_w else BIAS_VALUES
    choices = [v for v in domain if v != theta[p]]
    theta[p] = choices[rng.integers(len(choices))]
    return DeductronParams.from_flat(theta, params.shape)


def anneal(train: WindowSeq, shape: tuple[int, int, int], sched: AnnealSchedule = AnnealSchedule(),
           init: DeductronParams | None = None, chunk: int = 1 << 15) -> AnnealResult:
    """Anneal from ``sched.beta_start`` to ``sched.beta_end``.

    Candidates are scored with the falling sigmoid at the current beta; the
    best state is tracked by hard-threshold loss (ties broken by the loss
    at ``beta_ref``), and the walk restarts from it after ``stuck_limit``
    iterations without improvement.
    """
    if len(train) == 0:
        raise ValueError("empty training set")
    n_in, m, n_out = shape
    if train.n_in != n_in or train.n_out != n_out:
        raise ValueError(f"data is {train.n_in}->{train.n_out}, shape asks for {n_in}->{n_out}")
    rng = np.random.default_rng(sched.seed)
    if init is None:
        init = random_quantized(shape, rng)
    elif init.shape != tuple(shape) or init.mode != QUANTIZED:
        raise ValueError("initial parameters must be quantized with the requested shape")
    X = train.windows.astype(float)
    T = train.targets.astype(float)
    n_w, n_b = n_parameters(*shape)
    n_pos = n_w if sched.tied_bias else n_w + n_b
    cur = init.flat()
    if sched.tied_bias:
        _kernels._tie_biases(cur, n_in, m, n_out)
    best = cur.copy()
    base = (X, T, n_in, m, n_out)

    def loss_at(beta):
        return _kernels.sequence_loss(cur, *base, beta, sched.gamma, sched.update_first)

    # [current soft loss, best hard loss, best reference loss, stuck, restarts, evaluations]
    stats = np.array([loss_at(sched.beta_start), loss_at(-1.0), loss_at(sched.beta_ref), 0.0, 0.0, 1.0])
    total = sched.n_iterations
    history = []
    for start in range(0, total, chunk):
        stop = min(total, start + chunk)
        k = stop - start
        betas = sched.betas(start, stop)
        pos = rng.integers(n_pos, size=k)
        draws = rng.random(k)
        accept_u = rng.random(k)
        trace = np.empty((k, 2))
        _kernels.anneal_chunk(cur, best, *base, sched.gamma, sched.update_first, betas, pos, draws, accept_u, sched.beta_ref,
                              float(sched.effective_stuck_limit), sched.acceptance == "metropolis",
                              sched.tied_bias, n_w, stats, trace)
        idx = np.arange(start, stop)
        keep = (idx + 1) % sched.log_every == 0
        keep[-1] |= stop == total
        history.extend(zip(idx[keep] + 1, betas[keep], trace[keep, 0], trace[keep, 1]))
    return AnnealResult(
        best_params=DeductronParams.from_flat(best, shape),
        best_loss=float(stats[1]),
        iterations=total,
        restarts=int(stats[4]),
        seed=sched.seed,
        loss_history=np.array(history, dtype=float).reshape(-1, 4),
    )


def anneal_runs(train: WindowSeq, shape, sched: AnnealSchedule, seeds, threads: int | None = None):
    """Independent runs over ``seeds``; returns (best result, all results).

    The winner is the lowest loss, ties going to the earlier seed.
    """
    seeds = list(seeds)
    if threads is None:
        threads = int(os.environ.get("DEDUCTRON_THREADS", os.cpu_count() or 1))
    threads = max(1, min(threads, len(seeds)))

    def one(seed):
        return anneal(train, shape, AnnealSchedule(**{**asdict(sched), "seed": seed}))

    if threads == 1:
        results = [one(s) for s in seeds]
    else:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(one, seeds))
    best = min(results, key=lambda r: r.best_loss)
    return best, results


@dataclass(frozen=True)
class Accuracy:
    accuracy: float
    frame_accuracy: float
    text_match: bool
    confusion: dict  # per output: {"tp", "fp", "fn", "tn"}
    emitted: str
    expected: str


def evaluate_accuracy(params: DeductronParams, act: Activation | None, data: WindowSeq,
                      update_first: bool = True) -> Accuracy:
    """Threshold outputs at 0.5 and compare with the targets."""
    o = outputs(params, data.windows, act, update_first=update_first)
    pred = (o > 0.5).astype(np.uint8)
    t = data.targets
    confusion = {}
    for k in range(t.shape[1]):
        p, q = pred[:, k].astype(bool), t[:, k].astype(bool)
        confusion[k] = {"tp": int(np.sum(p & q)), "fp": int(np.sum(p & ~q)),
                        "fn": int(np.sum(~p & q)), "tn": int(np.sum(~p & ~q))}
    emitted, expected = emitted_text(pred), emitted_text(t)
    return Accuracy(
        accuracy=float(np.mean(pred == t)) if t.size else 1.0,
        frame_accuracy=float(np.mean(np.all(pred == t, axis=1))) if len(t) else 1.0,
        text_match=emitted == expected,
        confusion=confusion,
        emitted=emitted,
        expected=expected,
    )


def hard_loss(params: DeductronParams, data: WindowSeq, gamma: int = 1) -> float:
    o = outputs(params, data.windows, HARD)
    d = np.abs(o - data.targets)
    return float(np.sum(d if gamma == 1 else d ** gamma))
