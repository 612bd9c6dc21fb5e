import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from springerfib import _kernels_py, kernels

ckernels = pytest.importorskip("springerfib._ckernels")

PRIMES = st.sampled_from([2, 3, 5, 7, 13, 251])


@st.composite
def matrices(draw, max_rows=7, max_cols=7):
    p = draw(PRIMES)
    n = draw(st.integers(0, max_rows))
    m = draw(st.integers(0, max_cols))
    rows = draw(st.lists(st.lists(st.integers(0, p - 1), min_size=m, max_size=m), min_size=n, max_size=n))
    return p, m, rows


@settings(max_examples=300, deadline=None)
@given(matrices())
def test_rref_backends_agree(data):
    p, m, rows = data
    a = _kernels_py.rref_modp([r[:] for r in rows], m, p)
    b = ckernels.rref_modp([r[:] for r in rows], m, p)
    assert a == b


@settings(max_examples=300, deadline=None)
@given(matrices(), st.integers(0, 6), st.randoms(use_true_random=False))
def test_matmul_backends_agree(data, width, rnd):
    p, m, a = data
    b = [[rnd.randrange(p) for _ in range(width)] for _ in range(m)]
    assert _kernels_py.matmul_modp(a, b, width, p) == ckernels.matmul_modp(a, b, width, p)


def test_rref_reduces():
    rows, piv = _kernels_py.rref_modp([[2, 4, 1], [1, 2, 4]], 3, 5)
    assert piv == [0, 2]
    assert rows == [[1, 2, 0], [0, 0, 1]]


def test_backend_selection():
    assert kernels.BACKEND == "cython"
    code = "from springerfib import kernels; print(kernels.BACKEND)"
    env = {"SPRINGERFIB_PURE_PYTHON": "1", "PATH": ""}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
