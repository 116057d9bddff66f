import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from detrelay.gf2 import Gf2Matrix
from detrelay.network import gen_random

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_record():
    def record(name: str, ok: bool, detail: str = "") -> None:
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def np_rank_gf2(a) -> int:
    """Reference rank by textbook column-pivot elimination on a numpy copy."""
    a = np.array(a, dtype=np.uint8) % 2
    if a.size == 0:
        return 0
    r = 0
    rows, cols = a.shape
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i, c]), None)
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
        if r == rows:
            break
    return r


@st.composite
def binary_arrays(draw, max_rows=8, max_cols=8):
    n = draw(st.integers(0, max_rows))
    m = draw(st.integers(0, max_cols))
    bits = draw(st.lists(st.integers(0, 1), min_size=n * m, max_size=n * m))
    return np.array(bits, dtype=np.uint8).reshape(n, m)


@st.composite
def gf2_matrices(draw, max_rows=8, max_cols=8):
    return Gf2Matrix.from_array(draw(binary_arrays(max_rows, max_cols)))


@st.composite
def random_networks(draw, max_layers=5, max_supernodes=3, max_levels=3):
    layers = draw(st.integers(2, max_layers))
    density = draw(st.sampled_from([0.2, 0.5, 0.8, 1.0]))
    seed = draw(st.integers(0, 2**31 - 1))
    return gen_random(layers, max_supernodes, max_levels, density, seed)
