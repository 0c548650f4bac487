"""Dense-grid scan followed by golden-section refinement, used for witness points and gap constants."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-12,
               max_iter: int = 200) -> tuple[float, float]:
    """Maximise a unimodal scalar f on [a, b]. Returns (x, f(x))."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def grid_argmax(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                refine: bool = True) -> tuple[float, float]:
    """Largest value of a vectorised f over the sorted grid x, refined between neighbours.

    NaN values are ignored. The refined point is only accepted if it beats the grid value,
    so the result never gets worse than the scan.
    """
    y = np.asarray(f(x), dtype=np.float64)
    y = np.where(np.isnan(y), -np.inf, y)
    i = int(np.argmax(y))
    best_x, best_y = float(x[i]), float(y[i])
    if refine and len(x) > 2:
        # do not refine across a hole in the grid
        step = 1.5 * float(np.min(np.diff(x)))
        lo = float(x[i - 1]) if i > 0 and x[i] - x[i - 1] <= step else best_x
        hi = float(x[i + 1]) if i + 1 < len(x) and x[i + 1] - x[i] <= step else best_x
        scalar = lambda t: float(f(np.array([t]))[0])  # noqa: E731
        gx, gy = golden_max(scalar, lo, hi) if hi > lo else (best_x, best_y)
        if gy > best_y:
            best_x, best_y = gx, gy
    return best_x, best_y
