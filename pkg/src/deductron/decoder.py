"""Hand-written W-language decoder, in logical and in arithmetic form.

A window is six bits ``(x11, x21, x31, x12, x22, x32)``: column 1 then
column 2, each bottom-to-top. ``z1`` remembers "inside an 'X'", ``z2``
"inside an 'O'".

Two emission rules are supported:

``"entry"`` (default)
    emit when the signal *arrives* at the extremum (``x12 and not x11`` for
    'X'), so a stalled extremum emits once. This is the rule realized by the
    4-cell deductron.
``"frame"``
    emit on every frame showing the extremum (``x12``), the plain
    if/elif program; a stalled extremum emits repeatedly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .wlang import Image

EMIT_MODES = ("entry", "frame")


@dataclass(frozen=True)
class DecoderState:
    z1: int = 0
    z2: int = 0


def windows_from_image(img: Image) -> np.ndarray:
    """Sliding windows of two consecutive columns, shape ``(n_cols - 1, 6)``."""
    if img.n_cols < 2:
        raise ValueError(f"need at least 2 columns to form a window, got {img.n_cols}")
    px = img.pixels
    return np.concatenate([px[:-1], px[1:]], axis=1).astype(np.uint8)


def _check_mode(mode):
    if mode not in EMIT_MODES:
        raise ValueError(f"emit mode must be one of {EMIT_MODES}, got {mode!r}")


def step(state: DecoderState, w, mode: str = "entry") -> tuple[DecoderState, int, int]:
    _check_mode(mode)
    x11, x21, x31, x12, x22, x32 = (bool(v) for v in w)
    z1, z2 = state.z1, state.z2
    y1 = not x21 and not x31 and x32
    y2 = not x21 and not x11 and x12
    if y1:
        z1, z2 = 1, 0
    elif y2:
        z1, z2 = 0, 1
    if mode == "entry":
        emit_x = x12 and not x11 and z1
        emit_o = x32 and not x31 and z2
    else:
        emit_x = x12 and z1
        emit_o = x32 and z2
    return DecoderState(z1, z2), int(emit_x), int(emit_o)


def hard_s(a) -> int:
    """Integer threshold: 1 when ``a <= 0``, else 0."""
    return 1 if a <= 0 else 0


def step_arith(state: DecoderState, w, mode: str = "entry") -> tuple[DecoderState, int, int]:
    """Branch-free version of :func:`step`.

    The "else" of the original conditional survives as the factor ``1 - y1``
    on the 'O' detector; without it a window whose second column lights
    both the top and bottom pixel would end up in 'O' instead of 'X'.
    """
    _check_mode(mode)
    x11, x21, x31, x12, x22, x32 = (int(v) for v in w)
    z1, z2 = state.z1, state.z2
    y1 = hard_s(x21 + x31 + (1 - x32))
    y2 = hard_s(x21 + x11 + (1 - x12)) * (1 - y1)
    z1 = (1 - y1) * z1 + y1
    z2 = (1 - y1) * z2
    z2 = (1 - y2) * z2 + y2
    z1 = (1 - y2) * z1
    if mode == "entry":
        emit_x = hard_s(x11 + (1 - x12) + (1 - z1))
        emit_o = hard_s(x31 + (1 - x32) + (1 - z2))
    else:
        emit_x = hard_s((1 - x12) + (1 - z1))
        emit_o = hard_s((1 - x32) + (1 - z2))
    return DecoderState(z1, z2), emit_x, emit_o


def decode_windows(windows: np.ndarray, mode: str = "entry", arith: bool = False):
    """Run the decoder over a window sequence from state (0, 0).

    Returns ``(targets, states)``: an ``(n, 2)`` array of (emit_X, emit_O)
    and the memory state after each window.
    """
    fn = step_arith if arith else step
    state = DecoderState()
    targets = np.zeros((len(windows), 2), dtype=np.uint8)
    states = []
    for t, w in enumerate(windows):
        state, targets[t, 0], targets[t, 1] = fn(state, w, mode)
        states.append(state)
    return targets, states


def emitted_text(targets: np.ndarray) -> str:
    out = []
    for ex, eo in np.asarray(targets):
        if ex:
            out.append("X")
        if eo:
            out.append("O")
    return "".join(out)


def emission_track(targets: np.ndarray) -> str:
    """One character per window: 'X', 'O' or '_'."""
    return "".join("X" if ex else "O" if eo else "_" for ex, eo in np.asarray(targets))


@dataclass(frozen=True, eq=False)
class Decoding:
    windows: np.ndarray
    targets: np.ndarray
    n_cols: int
    text: str


def decode(img: Image, mode: str = "entry") -> Decoding:
    windows = windows_from_image(img)
    targets, _ = decode_windows(windows, mode)
    return Decoding(windows, targets, img.n_cols, emitted_text(targets))
