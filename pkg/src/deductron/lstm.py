"""Peephole LSTM forward pass, kept as a baseline for comparison with the deductron.

    f_t = sigmoid(W_f x_t + U_f c_{t-1} + b_f)
    i_t = sigmoid(W_i x_t + U_i c_{t-1} + b_i)
    o_t = sigmoid(W_o x_t + U_o c_{t-1} + b_o)
    c_t = f_t * c_{t-1} + i_t * tanh(W_c x_t + b_c)
    h_t = o_t * tanh(c_t)
"""
from __future__ import annotations

import json
from dataclasses import dataclass, fields

import numpy as np
from scipy.special import expit

LSTM_FORMAT = "lstm-params/1"


@dataclass(frozen=True, eq=False)
class LstmParams:
    W_f: np.ndarray
    W_i: np.ndarray
    W_o: np.ndarray
    W_c: np.ndarray
    U_f: np.ndarray
    U_i: np.ndarray
    U_o: np.ndarray
    b_f: np.ndarray
    b_i: np.ndarray
    b_o: np.ndarray
    b_c: np.ndarray

    def __post_init__(self):
        for f in fields(self):
            a = np.array(getattr(self, f.name), dtype=float)
            a.flags.writeable = False
            object.__setattr__(self, f.name, a)
        n_cell, n_in = self.W_f.shape
        for k in ("W_i", "W_o", "W_c"):
            if getattr(self, k).shape != (n_cell, n_in):
                raise ValueError(f"{k} has shape {getattr(self, k).shape}, expected {(n_cell, n_in)}")
        for k in ("U_f", "U_i", "U_o"):
            if getattr(self, k).shape != (n_cell, n_cell):
                raise ValueError(f"{k} has shape {getattr(self, k).shape}, expected {(n_cell, n_cell)}")
        for k in ("b_f", "b_i", "b_o", "b_c"):
            if getattr(self, k).shape != (n_cell,):
                raise ValueError(f"{k} has shape {getattr(self, k).shape}, expected {(n_cell,)}")

    @property
    def n_in(self) -> int:
        return self.W_f.shape[1]

    @property
    def n_cell(self) -> int:
        return self.W_f.shape[0]

    @classmethod
    def zeros(cls, n_in: int, n_cell: int) -> "LstmParams":
        kw = {}
        for f in fields(cls):
            if f.name.startswith("W"):
                kw[f.name] = np.zeros((n_cell, n_in))
            elif f.name.startswith("U"):
                kw[f.name] = np.zeros((n_cell, n_cell))
            else:
                kw[f.name] = np.zeros(n_cell)
        return cls(**kw)

    def replace(self, **kw) -> "LstmParams":
        return LstmParams(**{f.name: kw.get(f.name, getattr(self, f.name)) for f in fields(self)})

    def to_json(self) -> str:
        d = {"format": LSTM_FORMAT, "n_in": self.n_in, "n_cell": self.n_cell}
        d.update({f.name: getattr(self, f.name).tolist() for f in fields(self)})
        return json.dumps(d, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "LstmParams":
        d = json.loads(text)
        if d.get("format", LSTM_FORMAT) != LSTM_FORMAT:
            raise ValueError(f"unsupported LSTM parameter format {d.get('format')!r}")
        return cls(**{f.name: d[f.name] for f in fields(cls)})


def lstm_forward(params: LstmParams, x, c0=None) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(c, h)``, each of shape ``(n_frames, n_cell)``; ``c_0`` defaults to zero."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != params.n_in:
        raise ValueError(f"expected inputs of length {params.n_in}, got shape {x.shape}")
    p = params
    c = np.zeros(p.n_cell) if c0 is None else np.asarray(c0, dtype=float)
    # input contributions do not depend on the recurrence
    xf, xi, xo = x @ p.W_f.T + p.b_f, x @ p.W_i.T + p.b_i, x @ p.W_o.T + p.b_o
    cand = np.tanh(x @ p.W_c.T + p.b_c)
    cs = np.empty((len(x), p.n_cell))
    hs = np.empty((len(x), p.n_cell))
    for t in range(len(x)):
        f = expit(xf[t] + p.U_f @ c)
        i = expit(xi[t] + p.U_i @ c)
        o = expit(xo[t] + p.U_o @ c)
        c = f * c + i * cand[t]
        cs[t] = c
        hs[t] = o * np.tanh(c)
    return cs, hs
