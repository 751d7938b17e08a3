import numpy as np
import pytest

from deductron import wlang
from deductron.dataset import make_dataset
from deductron.network import handcrafted_params


@pytest.fixture
def fig4():
    return wlang.fig4_image()


@pytest.fixture
def fig4_data(fig4):
    return make_dataset(fig4)


@pytest.fixture
def handcrafted():
    return handcrafted_params()


def basic_sample(seed, n=500):
    return wlang.states_to_image(wlang.generate_basic(n, np.random.default_rng(seed)))


# --- acceptance summary ---------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for the acceptance summary."""

    def record(number, name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {name}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
