"""Reading quantized weight rows as propositional formulas.

A unit computes ``S(w . x + b)`` with S = 1 exactly when the argument is
<= 0. When the bias equals the number of -1 weights the unit is the
conjunction of ``x_j`` over ``w_j = -1`` and ``not x_j`` over ``w_j = +1``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .network import QUANTIZED, DeductronParams

CONJUNCTION = "conjunction"
CONSTANT_TRUE = "constant_true"
CONSTANT_FALSE = "constant_false"
NON_CONJUNCTIVE = "non_conjunctive"

EXHAUSTIVE_LIMIT = 20
DNF_LIMIT = 12

Literal = tuple[int, bool]  # (input index, positive?)


@dataclass(frozen=True)
class UnitFormula:
    name: str
    kind: str
    literals: tuple[Literal, ...] = ()
    dnf: tuple[tuple[Literal, ...], ...] | None = None
    weights: tuple[int, ...] = field(default=(), repr=False)
    bias: int = 0

    def render(self, var_names) -> str:
        def lit(l):
            j, pos = l
            return var_names[j] if pos else "!" + var_names[j]

        if self.kind == CONSTANT_TRUE:
            body = "TRUE"
        elif self.kind == CONSTANT_FALSE:
            body = "FALSE"
        elif self.kind == CONJUNCTION:
            body = "AND(" + ", ".join(lit(l) for l in self.literals) + ")"
        elif self.dnf is not None:
            body = "OR(" + ", ".join("AND(" + ", ".join(lit(l) for l in c) + ")" for c in self.dnf) + ")"
        else:
            terms = " ".join(f"{'+' if w > 0 else '-'}{var_names[j]}" for j, w in enumerate(self.weights) if w)
            body = f"NONCONJ(S({terms} +{self.bias}))"
        return f"{self.name} = {body}"


def bias_from_weights(row) -> int:
    """Sum of w(w-1)/2 over the row, i.e. the number of -1 entries."""
    return int(sum(w * (w - 1) // 2 for w in (int(v) for v in row)))


def _check_row(row, bias):
    row = np.asarray(row)
    if not np.isin(row, (-1, 0, 1)).all():
        raise ValueError(f"weights must lie in {{-1, 0, 1}}: {row.tolist()}")
    if int(bias) != bias or not 0 <= bias <= 5:
        raise ValueError(f"bias must be an integer in 0..5, got {bias}")
    return row.astype(int), int(bias)


def truth_table(row, bias) -> np.ndarray:
    """S(w . x + b) over all binary x, indexed in ``itertools.product`` order."""
    row = np.asarray(row, dtype=int)
    xs = np.array(list(itertools.product((0, 1), repeat=len(row))), dtype=int).reshape(-1, len(row))
    return (xs @ row + bias <= 0).astype(np.uint8)


def conjunction_literals(row) -> tuple[Literal, ...]:
    return tuple((j, w == -1) for j, w in enumerate(int(v) for v in row) if w != 0)


def eval_clause(literals, x) -> bool:
    return all(bool(x[j]) == pos for j, pos in literals)


def row_to_formula(row, bias, name: str = "y", dnf: bool = False) -> UnitFormula:
    row, bias = _check_row(row, bias)
    n = len(row)
    weights = tuple(row.tolist())
    if n <= EXHAUSTIVE_LIMIT:
        table = truth_table(row, bias)
        if table.all():
            return UnitFormula(name, CONSTANT_TRUE, weights=weights, bias=bias)
        if not table.any():
            return UnitFormula(name, CONSTANT_FALSE, weights=weights, bias=bias)
    if bias == bias_from_weights(row):
        return UnitFormula(name, CONJUNCTION, conjunction_literals(row), weights=weights, bias=bias)
    clauses = None
    if dnf and n <= DNF_LIMIT:
        clauses = tuple(
            tuple((j, bool(v)) for j, v in enumerate(x))
            for x, on in zip(itertools.product((0, 1), repeat=n), table) if on
        )
    return UnitFormula(name, NON_CONJUNCTIVE, dnf=clauses, weights=weights, bias=bias)


def input_names(n_in: int) -> list[str]:
    if n_in == 6:
        return ["x11", "x21", "x31", "x12", "x22", "x32"]
    return [f"x{j + 1}" for j in range(n_in)]


@dataclass(frozen=True)
class LogicReport:
    hidden: tuple[UnitFormula, ...]
    output: tuple[UnitFormula, ...]
    n_in: int
    n_memory: int

    def render(self) -> str:
        xs = input_names(self.n_in)
        zs = [f"z{i + 1}" for i in range(self.n_memory)]
        lines = [u.render(xs) for u in self.hidden] + [u.render(zs) for u in self.output]
        return "\n".join(lines) + "\n"


def report(params: DeductronParams, dnf: bool = False) -> LogicReport:
    if params.mode != QUANTIZED:
        raise ValueError("logic extraction needs quantized parameters; quantize first")
    hidden = tuple(row_to_formula(r, b, f"h{i + 1}", dnf) for i, (r, b) in enumerate(zip(params.W1, params.b1)))
    output = tuple(row_to_formula(r, b, f"o{i + 1}", dnf) for i, (r, b) in enumerate(zip(params.W2, params.b2)))
    return LogicReport(hidden, output, params.n_in, params.n_memory)
