import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from reluswap import kernels

compiled = pytest.mark.skipif(kernels.affine_compiled is None, reason="compiled kernel not built")

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def _pairwise(terms):
    # reference for one output: adjacent pairs, carry the odd one, repeat
    terms = list(terms)
    while len(terms) > 1:
        nxt = [terms[i] + terms[i + 1] for i in range(0, len(terms) - 1, 2)]
        if len(terms) % 2:
            nxt.append(terms[-1])
        terms = nxt
    return terms[0]


def test_fallback_matches_scalar_reference():
    rng = np.random.default_rng(3)
    h, w, b = rng.normal(size=(5, 7)), rng.normal(size=(3, 7)), rng.normal(size=3)
    out = kernels.affine_python(h, w, b)
    for r in range(5):
        for i in range(3):
            ref = _pairwise([w[i, j] * h[r, j] for j in range(7)] + [b[i]])
            assert out[r, i] == ref


@compiled
@given(st.integers(1, 9), st.integers(0, 9), st.integers(1, 6), st.data())
def test_compiled_and_fallback_agree_bitwise(rows, n_in, n_out, data):
    h = data.draw(arrays(np.float64, (rows, n_in), elements=finite))
    w = data.draw(arrays(np.float64, (n_out, n_in), elements=finite))
    b = data.draw(arrays(np.float64, (n_out,), elements=finite))
    a = kernels.affine_python(h, w, b)
    c = kernels.affine_compiled(h, w, b)
    assert a.view(np.uint64).tolist() == c.view(np.uint64).tolist()


def test_fallback_chunking_does_not_change_results(monkeypatch):
    rng = np.random.default_rng(0)
    h, w, b = rng.normal(size=(1000, 6)), rng.normal(size=(4, 6)), rng.normal(size=4)
    whole = kernels.affine_python(h, w, b)
    monkeypatch.setattr(kernels, "_CHUNK_ELEMENTS", 50)
    assert np.array_equal(whole, kernels.affine_python(h, w, b))


@pytest.mark.parametrize("fn", [kernels.affine_python] + ([kernels.affine_compiled] if kernels.affine_compiled else []))
def test_shape_mismatch_rejected(fn):
    with pytest.raises(ValueError):
        fn(np.zeros((2, 3)), np.zeros((4, 2)), np.zeros(4))


def test_zero_fan_in_gives_bias():
    out = kernels.affine(np.zeros((3, 0)), np.zeros((2, 0)), np.array([1.5, -2.0]))
    assert out.tolist() == [[1.5, -2.0]] * 3


def test_environment_forces_fallback():
    env = dict(os.environ, RELUSWAP_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from reluswap import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
