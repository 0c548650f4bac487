"""Gadget container, grid errors and the geometric calibration search."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from reluswap.errors import CalibrationFailed
from reluswap.net_ir import Network, eval_network, network_to_dict, serialize

GRID_POINTS = 4096
GRID_POINTS_2D = 64  # per axis, 4096 points in total
EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True, eq=False)
class Gadget:
    net: Network
    target: str  # "ReLU", "Derivative(k)", "Identity" or "Product"
    scale_param: float
    domain_half_width: float
    reported_error: float
    construction: str = ""  # class path for ReLU gadgets, e.g. "A2tilde"
    params: dict = field(default_factory=dict)

    @property
    def width(self) -> int:
        return self.net.width

    @property
    def depth(self) -> int:
        return self.net.depth

    def __call__(self, x):
        """Evaluate on scalars or arrays (single-input) or on (n, 2) arrays (product)."""
        arr = np.asarray(x, dtype=np.float64)
        if self.net.input_dim == 1:
            out = eval_network(self.net, arr.reshape(-1, 1))[:, 0]
            return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)
        out = eval_network(self.net, arr.reshape(-1, self.net.input_dim))[:, 0]
        return float(out[0]) if arr.ndim == 1 else out

    def metadata(self) -> dict:
        return {"target": self.target, "scale_param": self.scale_param,
                "domain_half_width": self.domain_half_width, "reported_error": self.reported_error,
                "construction": self.construction, "params": dict(self.params)}

    def to_json(self) -> bytes:
        return serialize(self.net, self.metadata())

    def to_dict(self) -> dict:
        doc = network_to_dict(self.net)
        doc["metadata"] = self.metadata()
        return doc


def grid(M: float, n: int = GRID_POINTS) -> np.ndarray:
    return np.linspace(-M, M, n)


def sup_abs(values: np.ndarray) -> float:
    """max |values|, with NaN counted as infinite."""
    v = np.abs(np.asarray(values, dtype=np.float64))
    if v.size == 0:
        return 0.0
    if np.isnan(v).any():
        return math.inf
    return float(v.max())


def scalar_error(net: Network, target: Callable, M: float, n: int = GRID_POINTS) -> float:
    x = grid(M, n)
    return sup_abs(eval_network(net, x[:, None])[:, 0] - target(x))


def relu_error(net: Network, M: float) -> float:
    return scalar_error(net, lambda x: np.maximum(x, 0.0), M)


@dataclass
class SearchResult:
    param: float
    error: float
    value: object  # whatever the evaluator built at the accepted parameter
    steps: int


def calibrate(evaluate: Callable[[float], tuple[float, object]], tol: float, *, p_max: float = math.inf,
              doublings: int = 60, bisections: int = 20, what: str = "") -> SearchResult:
    """Smallest parameter p >= 1 on the doubling ladder (then bisected) with evaluate(p)[0] <= tol.

    ``evaluate`` returns (error, value). For step-size parameters pass p = 1/step, so that
    growing p always means a finer approximation; ``p_max`` encodes the rounding floor.
    NaN errors count as infinite. Raises CalibrationFailed with the best error seen.
    """
    best = (math.inf, None, None)
    p = 1.0
    hit = None
    steps = 0
    for _ in range(doublings + 1):
        if p > p_max:
            break
        err, val = evaluate(p)
        steps += 1
        err = math.inf if math.isnan(err) else err
        if err < best[0]:
            best = (err, p, val)
        if err <= tol:
            hit = (p, err, val)
            break
        p *= 2.0
    if hit is None:
        # the last rung may overshoot the floor; try the floor itself
        if math.isfinite(p_max) and (best[1] is None or best[1] < p_max):
            err, val = evaluate(p_max)
            steps += 1
            if err <= tol:
                hit = (p_max, err, val)
            elif err < best[0]:
                best = (err, p_max, val)
        if hit is None:
            raise CalibrationFailed(best[0], what)
    p_hi, err_hi, val_hi = hit
    p_lo = p_hi / 2.0
    if p_hi > 1.0:
        for _ in range(bisections):
            mid = 0.5 * (p_lo + p_hi)
            err, val = evaluate(mid)
            steps += 1
            if err <= tol:
                p_hi, err_hi, val_hi = mid, err, val
            else:
                p_lo = mid
    return SearchResult(p_hi, err_hi, val_hi, steps)
