import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import basic_sample
from deductron import decoder, wlang
from deductron.cli import data_path
from deductron.dataset import InvalidImageError, WindowSeq, format_wset, make_dataset, parse_wset
from deductron.decoder import DecoderState
from deductron.wlang import B

ALL_WINDOWS = list(itertools.product((0, 1), repeat=6))
MEMORY_STATES = [DecoderState(0, 0), DecoderState(1, 0), DecoderState(0, 1)]
ALL_STATES = MEMORY_STATES + [DecoderState(1, 1)]


def run_oracle(states, mode):
    """Emission counts read off the chain states directly.

    An 'X' stroke begins with the step (blank or e1) -> e3 and an 'O' stroke
    with (blank or e3) -> e1. Inside an 'X' stroke every arrival at e1 from e2
    is a bottom extremum; inside an 'O' stroke every arrival at e3 from e2 is
    a top extremum.
    """
    run = None
    n_x = n_o = 0
    for a, b in zip(states, states[1:]):
        if b == B.E3 and a in (B.Z, B.E1):
            run = "X"
        elif b == B.E1 and a in (B.Z, B.E3):
            run = "O"
        if mode == "entry":
            n_x += run == "X" and a == B.E2M and b == B.E1
            n_o += run == "O" and a == B.E2P and b == B.E3
        else:
            n_x += run == "X" and b == B.E1
            n_o += run == "O" and b == B.E3
    return n_x, n_o


def test_fig4_entry(fig4):
    dec = decoder.decode(fig4)
    assert dec.text == "XOOXXO"
    assert decoder.emission_track(dec.targets) == "__X____O___O____X___X____O___"
    assert dec.windows.shape == (29, 6)


def test_fig4_frame_rule_agrees_without_stalls(fig4):
    # no column repeats in the sample image, so both rules see the same extrema
    assert decoder.decode(fig4, "frame").text == "XOOXXO"


def test_stalled_extremum():
    # blank, e3, e2, e1, e1, e1, blank: one 'X' with a three-frame stall
    states = [B.Z, B.E3, B.E2M, B.E1, B.E1, B.E1, B.Z]
    img = wlang.states_to_image(states)
    assert decoder.decode(img, "entry").text == "X"
    assert decoder.decode(img, "frame").text == "XXX"


def test_windows_from_image():
    img = wlang.Image([wlang.ZERO, wlang.E3, wlang.E2])
    w = decoder.windows_from_image(img)
    assert w.tolist() == [[0, 0, 0, 0, 0, 1], [0, 0, 1, 0, 1, 0]]
    with pytest.raises(ValueError):
        decoder.windows_from_image(wlang.Image([wlang.E1]))


@pytest.mark.parametrize("mode", decoder.EMIT_MODES)
def test_arith_matches_logic_exhaustively(mode):
    for z in ALL_STATES:
        for w in ALL_WINDOWS:
            assert decoder.step(z, w, mode) == decoder.step_arith(z, w, mode), (z, w)


def test_guard_on_o_detector_matters():
    # second column lights top and bottom: the 'X' branch must win
    w = (0, 0, 0, 1, 0, 1)
    state, _, _ = decoder.step(DecoderState(), w)
    assert state == DecoderState(1, 0)
    assert decoder.step_arith(DecoderState(), w)[0] == state


def test_memory_is_one_hot_or_empty():
    for z in MEMORY_STATES:
        for w in ALL_WINDOWS:
            s, ex, eo = decoder.step(z, w)
            assert s in MEMORY_STATES
            assert not (ex and eo)


def test_bad_mode():
    with pytest.raises(ValueError):
        decoder.step(DecoderState(), ALL_WINDOWS[0], "every")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 600), st.sampled_from(decoder.EMIT_MODES))
def test_emission_counts_match_run_oracle(seed, n, mode):
    states = wlang.generate_basic(n, np.random.default_rng(seed))
    targets, _ = decoder.decode_windows(decoder.windows_from_image(wlang.states_to_image(states)), mode)
    assert tuple(int(c) for c in targets.sum(axis=0)) == run_oracle(states, mode)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 400))
def test_arith_matches_logic_on_sentences(seed, n):
    w = decoder.windows_from_image(basic_sample(seed, n))
    a, sa = decoder.decode_windows(w)
    b, sb = decoder.decode_windows(w, arith=True)
    assert np.array_equal(a, b) and sa == sb


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 400))
def test_frame_rule_emits_superset(seed, n):
    w = decoder.windows_from_image(basic_sample(seed, n))
    entry, _ = decoder.decode_windows(w, "entry")
    frame, _ = decoder.decode_windows(w, "frame")
    assert np.all(entry <= frame)


# --- datasets -----------------------------------------------------------------------

def test_make_dataset_fig4(fig4_data):
    assert len(fig4_data) == 29 and fig4_data.n_in == 6 and fig4_data.n_out == 2
    assert fig4_data.text == "XOOXXO"
    assert fig4_data.n_cols == 30


def test_make_dataset_rejects_invalid():
    img = wlang.Image([wlang.ZERO, wlang.E3, wlang.E2, wlang.E3, wlang.ZERO])
    with pytest.raises(InvalidImageError) as err:
        make_dataset(img)
    assert err.value.index == 3
    assert len(make_dataset(img, validate=False)) == 4


def test_make_dataset_empty():
    with pytest.raises(ValueError):
        make_dataset(wlang.Image(np.zeros((0, 3), dtype=np.uint8)))


def test_wset_roundtrip(fig4_data):
    text = format_wset(fig4_data, ["note"])
    assert text.splitlines()[0] == "wset 29 6 2"
    assert parse_wset(text) == fig4_data


def test_packaged_fig4_files_match(fig4, fig4_data):
    assert wlang.parse_image(data_path("fig4.wimg").read_text()) == fig4
    assert parse_wset(data_path("fig4.wset").read_text()) == fig4_data


@pytest.mark.parametrize("text", [
    "wset 1 6 2\n0 0 0 0 0 1 0 0\n",
    "wset 2 6 2\n0 0 0 0 0 1 | 0 0\n",
    "wset 1 6 2\n0 0 0 0 0 2 | 0 0\n",
    "wset 1 6\n0 0 0 0 0 1 | 0 0\n",
])
def test_wset_parse_errors(text):
    with pytest.raises(ValueError):
        parse_wset(text)


def test_windowseq_shape_check():
    with pytest.raises(ValueError):
        WindowSeq(np.zeros((3, 6)), np.zeros((2, 2)))
