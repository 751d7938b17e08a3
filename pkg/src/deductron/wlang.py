"""The W-language: frames, images, topological Markov chains and the chaotic interval map.

Frames are stored bottom-to-top, so ``E1 = (1, 0, 0)`` is the bottom pixel
(a signal minimum) and ``E3 = (0, 0, 1)`` the top pixel (a maximum).
"""
from __future__ import annotations

import decimal
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Frame = tuple[int, int, int]

ZERO: Frame = (0, 0, 0)
E1: Frame = (1, 0, 0)
E2: Frame = (0, 1, 0)
E3: Frame = (0, 0, 1)

FRAME_NAMES = {ZERO: "0", E1: "e1", E2: "e2", E3: "e3"}


class BasicState(str, Enum):
    Z = "Z"
    E1 = "E1"
    E2P = "E2P"
    E2M = "E2M"
    E3 = "E3"


class PreciseState(str, Enum):
    # Declaration order is the interval order of the chaotic map: state k owns [k, k+1).
    E3XS = "E3XS"
    E2XM = "E2XM"
    E1X = "E1X"
    E2XP = "E2XP"
    E3XF = "E3XF"
    Z = "Z"
    E1OS = "E1OS"
    E2OP = "E2OP"
    E3O = "E3O"
    E2OM = "E2OM"
    E1OF = "E1OF"


PRECISE_ORDER: tuple[PreciseState, ...] = tuple(PreciseState)

_BASIC_FRAME = {
    BasicState.Z: ZERO,
    BasicState.E1: E1,
    BasicState.E2P: E2,
    BasicState.E2M: E2,
    BasicState.E3: E3,
}


def state_frame(state: BasicState | PreciseState) -> Frame:
    if isinstance(state, BasicState):
        return _BASIC_FRAME[state]
    name = state.value
    if name == "Z":
        return ZERO
    return {"1": E1, "2": E2, "3": E3}[name[1]]


def _with_loops(edges: dict) -> dict:
    return {s: (s,) + tuple(t for t in succ if t != s) for s, succ in edges.items()}


B = BasicState
BASIC_EDGES: dict[BasicState, tuple[BasicState, ...]] = _with_loops({
    B.Z: (B.E1, B.E3),
    B.E1: (B.Z, B.E2P, B.E3),
    B.E2P: (B.E3,),
    B.E3: (B.E1, B.Z, B.E2M),
    B.E2M: (B.E1,),
})
BASIC_TERMINAL = frozenset({B.Z, B.E1, B.E3})

P = PreciseState
PRECISE_EDGES: dict[PreciseState, tuple[PreciseState, ...]] = _with_loops({
    P.E1X: (P.E2XP,),
    P.E2XP: (P.E3XS, P.E3XF),
    P.E3XS: (P.E2XM,),
    P.E2XM: (P.E1X,),
    P.E3XF: (P.Z,),
    P.Z: (P.E3XS, P.E1OS),
    P.E1OS: (P.E2OP,),
    P.E2OP: (P.E3O,),
    P.E3O: (P.E2OM,),
    P.E2OM: (P.E1OS, P.E1OF),
    P.E1OF: (P.Z,),
})
PRECISE_START = P.Z
PRECISE_TERMINAL = frozenset({P.Z, P.E3XF, P.E1OF})


def chain_step(state, edges: dict, rng: np.random.Generator, weights: dict | None = None):
    """Move one edge along a topological Markov chain.

    ``weights`` optionally maps ``(src, dst)`` to a relative edge weight;
    missing edges default to 1, so the default is uniform over out-edges.
    """
    succ = edges[state]
    if weights is None:
        return succ[rng.integers(len(succ))]
    w = np.array([weights.get((state, t), 1.0) for t in succ], dtype=float)
    return succ[rng.choice(len(succ), p=w / w.sum())]


def basic_chain_step(state: BasicState, rng: np.random.Generator, weights: dict | None = None) -> BasicState:
    return chain_step(BasicState(state), BASIC_EDGES, rng, weights)


def precise_chain_step(state: PreciseState, rng: np.random.Generator, weights: dict | None = None) -> PreciseState:
    return chain_step(PreciseState(state), PRECISE_EDGES, rng, weights)


def _walk(states: list, n: int, edges, rng, weights) -> list:
    while len(states) < n:
        states.append(chain_step(states[-1], edges, rng, weights))
    return states


def _generate(n_frames, start, edges, terminal, rng, weights):
    if n_frames < 1:
        raise ValueError(f"n_frames must be positive, got {n_frames}")
    states = _walk([start], n_frames, edges, rng, weights)
    # Rejection on the tail: resample the last k steps, widening k after repeated misses.
    attempt = 0
    while states[-1] not in terminal:
        k = min(n_frames - 1, 1 + attempt // 8)
        del states[n_frames - k:]
        _walk(states, n_frames, edges, rng, weights)
        attempt += 1
    return states


def generate_basic(n_frames: int, rng: np.random.Generator, weights: dict | None = None) -> list[BasicState]:
    """Random valid sentence of ``n_frames`` basic-chain states (starts and ends in Z/E1/E3)."""
    starts = sorted(BASIC_TERMINAL, key=lambda s: s.value)
    start = starts[rng.integers(len(starts))]
    return _generate(n_frames, start, BASIC_EDGES, BASIC_TERMINAL, rng, weights)


def generate_precise(n_frames: int, rng: np.random.Generator, weights: dict | None = None) -> list[PreciseState]:
    """Random sentence of the precise chain; starts at Z and ends at Z, E3XF or E1OF."""
    return _generate(n_frames, PRECISE_START, PRECISE_EDGES, PRECISE_TERMINAL, rng, weights)


# --- chaotic interval map -------------------------------------------------

@dataclass(frozen=True)
class Branch:
    lo: Fraction
    hi: Fraction
    offset: Fraction
    slope: int

    def image(self) -> tuple[Fraction, Fraction]:
        return self.offset, self.offset + self.slope * (self.hi - self.lo)


def _br(lo, hi, offset, slope) -> Branch:
    return Branch(Fraction(lo), Fraction(hi), Fraction(offset), slope)


DEFAULT_BRANCHES: tuple[Branch, ...] = (
    _br(0, 1, 0, 2),
    _br(1, 2, 1, 2),
    _br(2, 3, 2, 2),
    _br(3, "7/2", 3, 4),
    _br("7/2", 4, 0, 2),
    _br(4, 5, 4, 2),
    _br(5, "11/2", 0, 2),
    _br("11/2", 6, 5, 4),
    _br(6, 7, 6, 2),
    _br(7, 8, 7, 2),
    _br(8, 9, 8, 2),
    _br(9, 10, 9, 2),
    _br(10, "21/2", 10, 2),
    _br("21/2", 11, 5, 2),
)

N_INTERVALS = len(PRECISE_ORDER)


@dataclass(frozen=True)
class IntervalMapConfig:
    branches: tuple[Branch, ...] = DEFAULT_BRANCHES
    digits: int | None = None  # None: sized from the trajectory length
    perturbation: float = 0.0

    def __post_init__(self):
        check_partition(self.branches)


def check_partition(branches: Sequence[Branch], length: int = N_INTERVALS) -> None:
    edge = Fraction(0)
    for b in branches:
        if b.lo != edge or b.hi <= b.lo:
            raise ValueError(f"branches do not tile [0,{length}) at {float(edge)}")
        edge = b.hi
    if edge != length:
        raise ValueError(f"branches end at {float(edge)}, expected {length}")


def _find_branch(x, branches: Sequence[Branch]) -> Branch:
    for b in branches:
        if x < _as(x, b.hi):
            return b
    raise AssertionError("unreachable")


def _as(x, q: Fraction):
    """Convert an exact endpoint into the arithmetic type of ``x``."""
    if isinstance(x, decimal.Decimal):
        return decimal.Decimal(q.numerator) / decimal.Decimal(q.denominator)
    if isinstance(x, Fraction):
        return q
    return float(q)


def interval_map_apply(x, cfg: IntervalMapConfig = IntervalMapConfig()):
    """One application of the piecewise-affine map on [0, 11).

    Works in the arithmetic of ``x`` (float, Decimal or Fraction).
    """
    if not (0 <= x < N_INTERVALS):
        raise ValueError(f"x={x} outside [0, {N_INTERVALS})")
    b = _find_branch(x, cfg.branches)
    y = _as(x, b.offset) + b.slope * (x - _as(x, b.lo))
    if cfg.perturbation:
        y = (y + type(y)(cfg.perturbation)) % N_INTERVALS
    return y


def required_digits(n_frames: int) -> int:
    return math.ceil(n_frames * math.log10(4)) + 16


def interval_state(x) -> PreciseState:
    return PRECISE_ORDER[int(math.floor(x))]


def generate_chaotic(x0, n_frames: int, cfg: IntervalMapConfig = IntervalMapConfig(),
                     arithmetic: str = "decimal", terminate: bool = False) -> list[PreciseState]:
    """Symbolic trajectory of the interval map, one precise-chain state per iterate.

    ``arithmetic="decimal"`` iterates in extended precision (``cfg.digits``
    significant digits, default sized from ``n_frames``); ``"float"`` uses
    binary doubles and collapses onto a fixed point after a few dozen steps.
    With ``terminate`` the trajectory is extended past ``n_frames`` until it
    reaches a terminal state of the precise chain.
    """
    if n_frames < 1:
        raise ValueError(f"n_frames must be positive, got {n_frames}")
    if arithmetic == "float":
        return _iterate(float(x0), n_frames, cfg, terminate, budget=None)
    if arithmetic != "decimal":
        raise ValueError(f"unknown arithmetic {arithmetic!r}")
    need = required_digits(n_frames)
    digits = cfg.digits if cfg.digits is not None else need
    if digits < need:
        raise ValueError(f"{digits} digits cannot resolve {n_frames} frames; need at least {need}")
    ctx = decimal.Context(prec=digits + 4, rounding=decimal.ROUND_HALF_EVEN)
    with decimal.localcontext(ctx):
        x = decimal.Decimal(x0) if not isinstance(x0, decimal.Decimal) else x0
        return _iterate(+x, n_frames, cfg, terminate, budget=digits - 16)


def _iterate(x, n_frames, cfg, terminate, budget):
    states = []
    spent = 0.0
    while True:
        states.append(interval_state(x))
        if len(states) >= n_frames and (not terminate or states[-1] in PRECISE_TERMINAL):
            return states
        spent += math.log10(_find_branch(x, cfg.branches).slope)
        if budget is not None and spent > budget:
            raise ValueError(f"precision exhausted after {len(states)} frames; raise digits")
        x = interval_map_apply(x, cfg)


def random_x0(rng: np.random.Generator, digits: int, lo: int = 5, hi: int = 6) -> decimal.Decimal:
    """A random point of [lo, hi) with ``digits`` random decimal digits."""
    frac = "".join(str(d) for d in rng.integers(0, 10, size=digits))
    span = hi - lo
    with decimal.localcontext(decimal.Context(prec=digits + 8)):
        return decimal.Decimal(lo) + span * decimal.Decimal("0." + frac)


# --- images -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Image:
    """Binary image, one row per column, each row (bottom, middle, top)."""

    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.ndim != 2 or px.shape[1] != 3:
            raise ValueError(f"image must have shape (n_cols, 3), got {px.shape}")
        if np.any(px > 1):
            raise ValueError("pixels must be 0 or 1")
        px = px.copy()
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def n_cols(self) -> int:
        return self.pixels.shape[0]

    @property
    def columns(self) -> list[Frame]:
        return [tuple(int(v) for v in c) for c in self.pixels]

    def __eq__(self, other):
        return isinstance(other, Image) and np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash(self.pixels.tobytes())

    @classmethod
    def from_rows(cls, top: Sequence[int], middle: Sequence[int], bottom: Sequence[int]) -> "Image":
        return cls(np.column_stack([bottom, middle, top]))

    def rows(self) -> tuple[list[int], list[int], list[int]]:
        """Rows top-to-bottom, as printed."""
        return tuple(self.pixels[:, k].tolist() for k in (2, 1, 0))


def states_to_image(states: Iterable[BasicState | PreciseState]) -> Image:
    frames = [state_frame(s) for s in states]
    if not frames:
        raise ValueError("empty state sequence")
    return Image(np.array(frames))


# Binary image of 'XOOXXO', rows top-to-bottom as printed.
FIG4_TOP = [0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0]
FIG4_MIDDLE = [0, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 0]
FIG4_BOTTOM = [0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0]


def fig4_image() -> Image:
    return Image.from_rows(FIG4_TOP, FIG4_MIDDLE, FIG4_BOTTOM)


def validate_image(img: Image) -> tuple[bool, int | None]:
    """Check that the image is a complete basic-chain sentence.

    Returns ``(ok, index)`` where ``index`` is the first offending column,
    or ``None`` when the image is valid. An image ending on e2 is reported
    at its last column.
    """
    cols = img.columns
    if not cols:
        return False, 0
    possible = {s for s in BASIC_TERMINAL if _BASIC_FRAME[s] == cols[0]}
    if not possible:
        return False, 0
    for i, col in enumerate(cols[1:], start=1):
        possible = {t for s in possible for t in BASIC_EDGES[s] if _BASIC_FRAME[t] == col}
        if not possible:
            return False, i
    if not possible & BASIC_TERMINAL:
        return False, len(cols) - 1
    return True, None


# --- text formats -------------------------------------------------------------

def _content_lines(text: str, path: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if s and not s.startswith("#"):
            yield lineno, s


def format_image(img: Image, comments: Sequence[str] = ()) -> str:
    lines = [f"wimg {img.n_cols}"]
    lines += [f"# {c}" for c in comments]
    lines += [" ".join(str(v) for v in row) for row in img.rows()]
    return "\n".join(lines) + "\n"


def parse_image(text: str, path: str = "<string>") -> Image:
    lines = list(_content_lines(text, path))
    if not lines:
        raise ValueError(f"{path}: empty file")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 2 or parts[0] != "wimg":
        raise ValueError(f"{path}:{lineno}: expected header 'wimg <n_cols>', got {header!r}")
    n = int(parts[1])
    if len(lines) != 4:
        raise ValueError(f"{path}: expected 3 pixel rows, got {len(lines) - 1}")
    rows = []
    for lineno, line in lines[1:]:
        vals = line.split()
        if len(vals) != n or any(v not in ("0", "1") for v in vals):
            raise ValueError(f"{path}:{lineno}: expected {n} binary digits")
        rows.append([int(v) for v in vals])
    if n == 0:
        raise ValueError(f"{path}: image has no columns")
    return Image.from_rows(*rows)


def format_chain(states: Sequence[BasicState | PreciseState], comments: Sequence[str] = ()) -> str:
    variant = "precise" if states and isinstance(states[0], PreciseState) else "basic"
    lines = [f"wchain {variant} {len(states)}"] + [f"# {c}" for c in comments]
    lines += [s.value for s in states]
    return "\n".join(lines) + "\n"


def parse_chain(text: str, path: str = "<string>") -> list:
    lines = list(_content_lines(text, path))
    if not lines or lines[0][1].split()[0] != "wchain":
        raise ValueError(f"{path}:1: expected header 'wchain <variant> <n>'")
    _, variant, n = lines[0][1].split()
    kind = {"basic": BasicState, "precise": PreciseState}[variant]
    states = []
    for lineno, tok in lines[1:]:
        try:
            states.append(kind(tok))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: unknown {variant} state {tok!r}") from None
    if len(states) != int(n):
        raise ValueError(f"{path}: header says {n} states, found {len(states)}")
    return states
