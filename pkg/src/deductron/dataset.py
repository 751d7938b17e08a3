"""Training sequences: sliding windows paired with decoder targets, and the ``wset`` file format."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import decoder
from .wlang import Image, validate_image


@dataclass(frozen=True, eq=False)
class WindowSeq:
    windows: np.ndarray = field(repr=False)
    targets: np.ndarray = field(repr=False)
    n_cols: int | None = None

    def __post_init__(self):
        w = np.asarray(self.windows, dtype=np.uint8)
        t = np.asarray(self.targets, dtype=np.uint8)
        if w.ndim != 2 or t.ndim != 2 or len(w) != len(t):
            raise ValueError(f"windows {w.shape} and targets {t.shape} do not line up")
        object.__setattr__(self, "windows", w)
        object.__setattr__(self, "targets", t)
        if self.n_cols is None:
            object.__setattr__(self, "n_cols", len(w) + 1)

    def __len__(self):
        return len(self.windows)

    @property
    def n_in(self) -> int:
        return self.windows.shape[1]

    @property
    def n_out(self) -> int:
        return self.targets.shape[1]

    @property
    def text(self) -> str:
        return decoder.emitted_text(self.targets)

    def __eq__(self, other):
        return (isinstance(other, WindowSeq) and np.array_equal(self.windows, other.windows)
                and np.array_equal(self.targets, other.targets))


class InvalidImageError(ValueError):
    def __init__(self, index: int):
        super().__init__(f"image is not a valid W-language sentence (first violation at column {index})")
        self.index = index


def make_dataset(img: Image, mode: str = "entry", validate: bool = True) -> WindowSeq:
    """Windows of ``img`` labelled by the reference decoder."""
    if img.n_cols == 0:
        raise ValueError("empty image")
    if validate:
        ok, idx = validate_image(img)
        if not ok:
            raise InvalidImageError(idx)
    dec = decoder.decode(img, mode)
    return WindowSeq(dec.windows, dec.targets, img.n_cols)


def format_wset(ds: WindowSeq, comments: Sequence[str] = ()) -> str:
    lines = [f"wset {len(ds)} {ds.n_in} {ds.n_out}"] + [f"# {c}" for c in comments]
    for w, t in zip(ds.windows, ds.targets):
        lines.append(" ".join(map(str, w)) + " | " + " ".join(map(str, t)))
    return "\n".join(lines) + "\n"


def parse_wset(text: str, path: str = "<string>") -> WindowSeq:
    rows = [(i, s.strip()) for i, s in enumerate(text.splitlines(), start=1)
            if s.strip() and not s.strip().startswith("#")]
    if not rows:
        raise ValueError(f"{path}: empty file")
    lineno, header = rows[0]
    parts = header.split()
    if len(parts) != 4 or parts[0] != "wset":
        raise ValueError(f"{path}:{lineno}: expected header 'wset <n_windows> <n_in> <n_out>', got {header!r}")
    n, n_in, n_out = (int(p) for p in parts[1:])
    if len(rows) - 1 != n:
        raise ValueError(f"{path}: header says {n} windows, found {len(rows) - 1}")
    windows = np.zeros((n, n_in), dtype=np.uint8)
    targets = np.zeros((n, n_out), dtype=np.uint8)
    for k, (lineno, line) in enumerate(rows[1:]):
        left, sep, right = line.partition("|")
        xs, ts = left.split(), right.split()
        if not sep or len(xs) != n_in or len(ts) != n_out or any(v not in ("0", "1") for v in xs + ts):
            raise ValueError(f"{path}:{lineno}: expected {n_in} bits '|' {n_out} bits")
        windows[k] = [int(v) for v in xs]
        targets[k] = [int(v) for v in ts]
    return WindowSeq(windows, targets)
