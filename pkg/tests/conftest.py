import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

ELW = (3.0, 5.0, 0.0, 1.0)

finite = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)


@st.composite
def unit_quaternions(draw):
    v = draw(arrays(np.float64, (4,), elements=finite))
    n = np.linalg.norm(v)
    if n < 1e-3:
        v, n = np.array([1.0, 0.0, 0.0, 0.0]), 1.0
    return v / n


@st.composite
def imaginary_units(draw):
    v = draw(arrays(np.float64, (3,), elements=finite))
    n = np.linalg.norm(v)
    if n < 1e-3:
        return np.array([0.0, 0.0, 0.0, 1.0])
    return np.concatenate([[0.0], v / n])


def random_unit(rng, n=None):
    v = rng.normal(size=(4,) if n is None else (n, 4))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_su2(rng):
    v = random_unit(rng)
    return np.array([[complex(v[0], v[3]), complex(v[1], v[2])],
                     [-complex(v[1], -v[2]), complex(v[0], -v[3])]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
