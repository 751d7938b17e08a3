"""The deductron: perceptron layer, V-gate memory layer, perceptron output layer."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ._kernels import memory_scan

QUANTIZED = "quantized"
CONTINUOUS = "continuous"
WEIGHT_VALUES = (-1, 0, 1)
BIAS_VALUES = (0, 1, 2, 3, 4, 5)
PARAMS_FORMAT = "deductron-params/1"


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class DeductronParams:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    mode: str = QUANTIZED

    def __post_init__(self):
        for name in ("W1", "b1", "W2", "b2"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        W1, b1, W2, b2 = self.W1, self.b1, self.W2, self.b2
        if W1.ndim != 2 or W2.ndim != 2 or b1.ndim != 1 or b2.ndim != 1:
            raise ValueError("W1, W2 must be matrices and b1, b2 vectors")
        if W1.shape[0] % 2 or W1.shape[0] != b1.shape[0]:
            raise ValueError(f"W1 {W1.shape} / b1 {b1.shape}: need 2*n_memory rows")
        if W2.shape != (b2.shape[0], W1.shape[0] // 2):
            raise ValueError(f"W2 {W2.shape} inconsistent with n_memory={W1.shape[0] // 2}, b2 {b2.shape}")
        if self.mode == QUANTIZED:
            if not (np.isin(W1, WEIGHT_VALUES).all() and np.isin(W2, WEIGHT_VALUES).all()):
                raise ValueError("quantized weights must lie in {-1, 0, 1}")
            if not (np.isin(b1, BIAS_VALUES).all() and np.isin(b2, BIAS_VALUES).all()):
                raise ValueError("quantized biases must lie in {0, ..., 5}")
        elif self.mode != CONTINUOUS:
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def n_in(self) -> int:
        return self.W1.shape[1]

    @property
    def n_memory(self) -> int:
        return self.W1.shape[0] // 2

    @property
    def n_out(self) -> int:
        return self.W2.shape[0]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.n_in, self.n_memory, self.n_out

    def __eq__(self, other):
        return (isinstance(other, DeductronParams) and self.mode == other.mode
                and all(np.array_equal(getattr(self, k), getattr(other, k)) for k in ("W1", "b1", "W2", "b2")))

    # flat layout [W1, W2, b1, b2], shared with the annealing kernel
    def flat(self) -> np.ndarray:
        return np.concatenate([self.W1.ravel(), self.W2.ravel(), self.b1, self.b2])

    @classmethod
    def from_flat(cls, theta, shape, mode=QUANTIZED) -> "DeductronParams":
        n_in, m, n_out = shape
        theta = np.asarray(theta, dtype=float)
        i = 0
        W1 = theta[i:i + 2 * m * n_in].reshape(2 * m, n_in); i += 2 * m * n_in
        W2 = theta[i:i + n_out * m].reshape(n_out, m); i += n_out * m
        b1 = theta[i:i + 2 * m]; i += 2 * m
        b2 = theta[i:i + n_out]
        return cls(W1, b1, W2, b2, mode)

    def to_dict(self) -> dict:
        conv = (lambda a: a.astype(int).tolist()) if self.mode == QUANTIZED else (lambda a: a.tolist())
        return {
            "format": PARAMS_FORMAT,
            "n_in": self.n_in, "n_memory": self.n_memory, "n_out": self.n_out, "mode": self.mode,
            "W1": conv(self.W1), "b1": conv(self.b1), "W2": conv(self.W2), "b2": conv(self.b2),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DeductronParams":
        fmt = d.get("format", PARAMS_FORMAT)
        if fmt != PARAMS_FORMAT:
            raise ValueError(f"unsupported parameter format {fmt!r}")
        p = cls(d["W1"], d["b1"], d["W2"], d["b2"], d.get("mode", QUANTIZED))
        if (p.n_in, p.n_memory, p.n_out) != (d.get("n_in", p.n_in), d.get("n_memory", p.n_memory), d.get("n_out", p.n_out)):
            raise ValueError("declared dimensions disagree with array shapes")
        return p

    def to_json(self, extra: dict | None = None) -> str:
        d = self.to_dict()
        if extra:
            d["config"] = extra
        return json.dumps(d, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "DeductronParams":
        return cls.from_dict(json.loads(text))


def handcrafted_params() -> DeductronParams:
    """The 4-memory-cell decoder written out by hand.

    Inputs are ordered (x11, x21, x31, x12, x22, x32). Hidden rows u1..u4
    detect: start of 'X', start of 'O', arrival at the bottom pixel,
    arrival at the top pixel; v1, v2 reset z1/z2 on the opposite start and
    v3, v4 are constant 1 so z3, z4 simply latch u3, u4.
    """
    W1 = [
        [0, 1, 1, 0, 0, -1],
        [1, 1, 0, -1, 0, 0],
        [1, 0, 0, -1, 0, 0],
        [0, 0, 1, 0, 0, -1],
        [1, 1, 0, -1, 0, 0],
        [0, 1, 1, 0, 0, -1],
        [0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0],
    ]
    b1 = [1, 1, 1, 1, 1, 1, 0, 0]
    W2 = [[-1, 0, -1, 0], [0, -1, 0, -1]]
    b2 = [2, 2]
    return DeductronParams(W1, b1, W2, b2, QUANTIZED)


@dataclass(frozen=True)
class Activation:
    """``hard``: 1 below 0.5, 0 above; ``falling``: 1/(1+exp(beta(a-0.5))); ``rising``: logistic."""

    kind: str = "hard"
    beta: float = float("inf")

    def __post_init__(self):
        if self.kind not in ("hard", "falling", "rising"):
            raise ValueError(f"unknown activation {self.kind!r}")
        if self.kind == "falling" and not self.beta >= 0:
            raise ValueError("beta must be non-negative")

    def __call__(self, a):
        a = np.asarray(a, dtype=float)
        if self.kind == "hard":
            if np.any(a == 0.5):
                raise ValueError("hard threshold hit exactly at 0.5; output would not be binary")
            return (a < 0.5).astype(float)
        if self.kind == "falling":
            return falling_sigmoid(a, self.beta)
        return expit(a)


HARD = Activation("hard")
RISING = Activation("rising")


def falling(beta: float) -> Activation:
    return Activation("falling", beta)


def falling_sigmoid(a, beta: float):
    return expit(-beta * (np.asarray(a, dtype=float) - 0.5))


def default_activation(params: DeductronParams) -> Activation:
    return HARD if params.mode == QUANTIZED else RISING


def v_gate(z, u, v):
    z, u, v = (np.asarray(a, dtype=float) for a in (z, u, v))
    if not (z.shape == u.shape == v.shape):
        raise ValueError(f"V-gate operands differ in shape: {z.shape}, {u.shape}, {v.shape}")
    return (1 - u) * (1 - v) * z + u


@dataclass(frozen=True, eq=False)
class ForwardTrace:
    h: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    o: np.ndarray = field(repr=False)
    a1: np.ndarray = field(repr=False)
    a2: np.ndarray = field(repr=False)

    @property
    def n_frames(self) -> int:
        return self.o.shape[0]


def forward(params: DeductronParams, act: Activation | None = None, x=None,
            update_first: bool = True) -> ForwardTrace:
    """Run the network over a window sequence.

    With the rising (logistic) activation the output layer is complemented,
    ``o = 1 - sigma(W2 z + b2)``. ``update_first=False`` reproduces the
    simulator in which memory is first written at frame 1, leaving frame 0
    unread.
    """
    act = act or default_activation(params)
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != params.n_in:
        raise ValueError(f"expected windows of length {params.n_in}, got shape {x.shape}")
    if len(x) == 0:
        raise ValueError("empty window sequence")
    m = params.n_memory
    a1 = x @ params.W1.T + params.b1
    h = act(a1)
    u, v = h[:, :m], h[:, m:]
    z = memory_scan(np.ascontiguousarray(u), np.ascontiguousarray(v), update_first)
    a2 = z @ params.W2.T + params.b2
    o = 1.0 - act(a2) if act.kind == "rising" else act(a2)
    return ForwardTrace(h, u, v, z, o, a1, a2)


def outputs(params: DeductronParams, x, act: Activation | None = None, **kw) -> np.ndarray:
    return forward(params, act, x, **kw).o


def loss(o, targets, gamma: int = 1) -> float:
    """Sum over frames and outputs of |t - o|^gamma."""
    if isinstance(o, ForwardTrace):
        o = o.o
    o = np.asarray(o, dtype=float)
    t = np.asarray(targets, dtype=float)
    if o.shape != t.shape:
        raise ValueError(f"outputs {o.shape} and targets {t.shape} differ in shape")
    d = np.abs(t - o)
    return float(np.sum(d if gamma == 1 else d ** gamma))


def quantized_to_continuous(params: DeductronParams, beta: float) -> DeductronParams:
    """Fold the falling-sigmoid inverse temperature and 0.5 shift into weights.

    Hidden layer: ``sigma(W1' x + b1') == S_beta(W1 x + b1)`` with
    ``W1' = -beta W1``, ``b1' = -beta (b1 - 0.5)``. The output layer is
    complemented in the continuous network, so there the sign flips:
    ``1 - sigma(W2' z + b2') == S_beta(W2 z + b2)`` with ``W2' = beta W2``.
    """
    if params.mode != QUANTIZED:
        raise ValueError("expected quantized parameters")
    if not beta > 0:
        raise ValueError("beta must be positive")
    return DeductronParams(
        -beta * params.W1, -beta * (params.b1 - 0.5),
        beta * params.W2, beta * (params.b2 - 0.5),
        CONTINUOUS,
    )


def random_quantized(shape, rng: np.random.Generator) -> DeductronParams:
    n_in, m, n_out = shape
    return DeductronParams(
        rng.choice(WEIGHT_VALUES, size=(2 * m, n_in)),
        rng.choice(BIAS_VALUES, size=2 * m),
        rng.choice(WEIGHT_VALUES, size=(n_out, m)),
        rng.choice(BIAS_VALUES, size=n_out),
    )


def quantize(params: DeductronParams, beta: float | None = None) -> DeductronParams:
    """Round continuous parameters to the quantized domains (lossy).

    ``beta`` undoes :func:`quantized_to_continuous` before rounding; when
    omitted it is estimated from the largest hidden weight magnitude.
    """
    if params.mode == QUANTIZED:
        return params
    if beta is None:
        beta = float(np.max(np.abs(params.W1))) or 1.0
    W1 = np.clip(np.rint(-params.W1 / beta), -1, 1)
    b1 = np.clip(np.rint(-params.b1 / beta + 0.5), 0, 5)
    W2 = np.clip(np.rint(params.W2 / beta), -1, 1)
    b2 = np.clip(np.rint(params.b2 / beta + 0.5), 0, 5)
    return DeductronParams(W1, b1, W2, b2, QUANTIZED)


def n_parameters(n_in: int, n_memory: int, n_out: int) -> tuple[int, int]:
    """(weight count, bias count)."""
    return 2 * n_memory * n_in + n_out * n_memory, 2 * n_memory + n_out


def search_space_size(n_in: int, n_memory: int, n_out: int) -> int:
    """Number of quantized parameter sets: 3 per weight, 6 per bias."""
    if min(n_in, n_memory, n_out) < 1:
        raise ValueError("dimensions must be positive")
    n_w, n_b = n_parameters(n_in, n_memory, n_out)
    return 3 ** n_w * 6 ** n_b
