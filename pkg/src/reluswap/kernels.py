"""Dense affine kernel with a compiled core and a numpy fallback.

The compiled extension is used when it imports; set ``RELUSWAP_PURE_PYTHON=1`` to force
the fallback. Both implementations sum in the same pairwise order, so they return
identical bits. The fixed order is what makes the product gadget cancel exactly on the
axes (see :func:`reluswap.gadgets.product_gadget`).
"""
from __future__ import annotations

import os

import numpy as np

# keeps the (rows, out, in + 1) temporary of the fallback near 32 MB
_CHUNK_ELEMENTS = 4_000_000


def affine_python(h: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    h = np.ascontiguousarray(h, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    n_rows, n_in = h.shape
    n_out = w.shape[0]
    if w.shape[1] != n_in or b.shape[0] != n_out:
        raise ValueError("affine: shape mismatch")
    out = np.empty((n_rows, n_out), dtype=np.float64)
    step = max(1, _CHUNK_ELEMENTS // max(1, n_out * (n_in + 1)))
    for start in range(0, n_rows, step):
        block = h[start:start + step]
        terms = np.empty((block.shape[0], n_out, n_in + 1), dtype=np.float64)
        np.multiply(block[:, None, :], w[None, :, :], out=terms[:, :, :n_in])
        terms[:, :, n_in] = b
        out[start:start + step] = _pairwise_last_axis(terms)
    return out


def _pairwise_last_axis(terms: np.ndarray) -> np.ndarray:
    while terms.shape[-1] > 1:
        m = terms.shape[-1]
        half = m // 2
        summed = terms[..., 0:2 * half:2] + terms[..., 1:2 * half:2]
        if m % 2:
            summed = np.concatenate([summed, terms[..., m - 1:m]], axis=-1)
        terms = summed
    return terms[..., 0]


try:
    if os.environ.get("RELUSWAP_PURE_PYTHON"):
        raise ImportError("pure python requested")
    from reluswap._core import affine as affine_compiled
except ImportError:
    affine_compiled = None

BACKEND = "compiled" if affine_compiled is not None else "python"
affine = affine_compiled if affine_compiled is not None else affine_python

__all__ = ["affine", "affine_python", "affine_compiled", "BACKEND"]
