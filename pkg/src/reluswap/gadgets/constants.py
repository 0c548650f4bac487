"""Gap constants m = inf and M_sup = sup of y * (1[y > 0] - h_hat(y)) for single-neuron activations.

They bound the single-neuron error: m/K <= ReLU(x) - phi_K(x) <= M_sup/K.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from reluswap._search import grid_argmax
from reluswap.activations.classify import Classification, s_shape_normalize
from reluswap.errors import NotA2tilde, Unbounded

GRID_HALF_WIDTH = 200.0
GRID_STEP = 1e-3


@dataclass(frozen=True)
class GapConstants:
    m: float
    M_sup: float
    argmin: float  # where the infimum is attained, +-inf for a tail limit
    argmax: float
    flags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {"m": self.m, "M_sup": self.M_sup, "argmin": _json_float(self.argmin),
                "argmax": _json_float(self.argmax), "flags": list(self.flags)}


def _json_float(v: float):
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def gap_function(cls: Classification):
    """y -> ReLU(y) - (out_scale * rho(in_scale * y + in_shift) + out_shift), no division by y."""
    nd = s_shape_normalize(cls)
    if not nd.tilde:
        raise NotA2tilde(f"{cls.spec.name}: h has no zero limit, the single-neuron bound does not apply")
    fn = cls.spec.fn

    def g(y):
        y = np.asarray(y, dtype=np.float64)
        return np.maximum(y, 0.0) - (nd.out_scale * fn(nd.in_scale * y + nd.in_shift) + nd.out_shift)
    return g


def estimate_gap_constants(cls: Classification) -> GapConstants:
    """Dense grid (step 1e-3, +-200, both scaled to h's transition width), golden-section polish, tail limits.

    Built-ins carry the limits of the gap at +-inf; for other activations the grid ends are
    used as tail estimates and the result is flagged "tail-unverified", unless the gap is
    still growing there, which raises Unbounded.
    """
    sd = cls.s_decomp
    if sd is None or not sd.tilde:
        raise NotA2tilde(f"{cls.spec.name} is not a single-neuron (L1 * L2 = 0) activation")
    g = gap_function(cls)
    nd = s_shape_normalize(cls)
    # the transition of h_hat sits at (center - in_shift) / in_scale with width scale / |in_scale|
    c = (sd.center - nd.in_shift) / nd.in_scale
    s = sd.scale / abs(nd.in_scale)
    n = int(round(2 * GRID_HALF_WIDTH / GRID_STEP)) + 1
    y = c + s * np.linspace(-GRID_HALF_WIDTH, GRID_HALF_WIDTH, n)
    xmax, vmax = grid_argmax(g, y)
    xmin, neg = grid_argmax(lambda t: -g(t), y)
    vmin = -neg
    flags: list[str] = []
    tails = sd.gap_tails
    if tails is None:
        tails = _unverified_tails(g, c, s)
        flags.append("tail-unverified")
    lo_tail, hi_tail = tails
    for tail, where in ((lo_tail, -math.inf), (hi_tail, math.inf)):
        if tail > vmax:
            vmax, xmax = tail, where
        if tail < vmin:
            vmin, xmin = tail, where
    return GapConstants(m=float(vmin), M_sup=float(vmax), argmin=float(xmin), argmax=float(xmax), flags=tuple(flags))


def _unverified_tails(g, c: float, s: float) -> tuple[float, float]:
    out = []
    for sign in (-1.0, 1.0):
        pts = c + sign * s * np.array([GRID_HALF_WIDTH / 4, GRID_HALF_WIDTH / 2, GRID_HALF_WIDTH])
        v = g(pts)
        d1, d2 = abs(v[1] - v[0]), abs(v[2] - v[1])
        # a convergent tail changes less on the outer doubling than on the inner one
        if not np.all(np.isfinite(v)) or (d2 > 1e-6 and d2 >= 0.9 * d1):
            raise Unbounded(f"gap still changes by {d2:.3g} near y = {pts[-1]:g}")
        out.append(float(v[-1]))
    return out[0], out[1]
