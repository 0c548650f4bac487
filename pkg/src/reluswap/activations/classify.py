"""Class membership, witnesses and S-shape normalisation for activation specs."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from reluswap._search import grid_argmax
from reluswap.activations.registry import ActivationSpec, ClassInfo, Kink, SDecomp
from reluswap.errors import AtKink, LimitMismatch, NotInA, ParameterDomainError

_EPS = np.finfo(np.float64).eps
WITNESS_RANGE = 10.0
WITNESS_STEP = 1e-3
# witnesses stay at least this far from points where the needed derivative is missing
KINK_MARGIN = 1.0


@dataclass(frozen=True)
class CurvaturePoint:
    x0: float
    rho_pp: float


@dataclass(frozen=True)
class SlopePoint:
    x1: float
    rho_p: float


@dataclass(frozen=True)
class Classification:
    spec: ActivationSpec = field(repr=False)
    memberships: tuple[str, ...]
    kink: Kink | None = None
    s_decomp: SDecomp | None = None
    curvature_point: CurvaturePoint | None = None
    slope_point: SlopePoint | None = None
    asymptotes: tuple[float, float] | None = None
    # "probed" when memberships came from numeric probing rather than the built-in table
    flags: tuple[str, ...] = ()

    def has(self, cls: str) -> bool:
        if cls == "A1k":
            return self.kink is not None
        return cls in self.memberships

    def to_json(self) -> dict:
        out: dict = {"activation": self.spec.name, "params": dict(self.spec.params),
                     "memberships": list(self.memberships)}
        if self.kink is not None:
            k = self.kink
            out["kink"] = {"x0": k.x0, "order": k.order, "L1": k.L1, "L2": k.L2}
        if self.s_decomp is not None:
            s = self.s_decomp
            out["s_decomp"] = {"b0": s.b0, "b1": s.b1, "L1": s.L1, "L2": s.L2}
        if self.asymptotes is not None:
            out["asymptotes"] = {"L1": self.asymptotes[0], "L2": self.asymptotes[1]}
        if self.curvature_point is not None:
            out["curvature_point"] = {"x0": self.curvature_point.x0, "rho_pp": self.curvature_point.rho_pp}
        if self.slope_point is not None:
            out["slope_point"] = {"x1": self.slope_point.x1, "rho_p": self.slope_point.rho_p}
        out["flags"] = list(self.flags)
        return out


# evaluation

def eval_activation(spec: ActivationSpec, x):
    """Closed-form value; returns a float for scalar input, an array otherwise."""
    arr = np.asarray(x, dtype=np.float64)
    y = spec.fn(arr)
    return float(y) if arr.ndim == 0 else np.asarray(y, dtype=np.float64)


def _check_kink(spec: ActivationSpec, order: int, x) -> None:
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    for x0, max_order in spec.singular:
        if order > max_order and np.any(xs == x0):
            raise AtKink(x0, order)


def derivative_method(spec: ActivationSpec, order: int) -> str:
    if order == 0:
        return "closed_form"
    analytic = spec.d1 if order == 1 else spec.d2
    return "analytic" if analytic is not None else "central_difference"


def central_difference(f: Callable, order: int, x):
    """Central difference with steps cbrt(eps) (order 1) and eps^(1/4) (order 2), relative to |x|."""
    x = np.asarray(x, dtype=np.float64)
    scale = np.maximum(1.0, np.abs(x))
    if order == 1:
        h = np.cbrt(_EPS) * scale
        return (f(x + h) - f(x - h)) / (2.0 * h)
    h = _EPS ** 0.25 * scale
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)


def eval_derivative(spec: ActivationSpec, order: int, x):
    """rho^(order)(x) for order 0, 1 or 2. The method used is given by :func:`derivative_method`."""
    if order not in (0, 1, 2):
        raise ParameterDomainError(f"derivative order must be 0, 1 or 2, got {order}")
    _check_kink(spec, order, x)
    arr = np.asarray(x, dtype=np.float64)
    if order == 0:
        y = spec.fn(arr)
    else:
        analytic = spec.d1 if order == 1 else spec.d2
        y = analytic(arr) if analytic is not None else central_difference(spec.fn, order, arr)
    return float(y) if arr.ndim == 0 else np.asarray(y, dtype=np.float64)


# witness points

def _allowed_grid(spec: ActivationSpec, order: int) -> np.ndarray:
    n = int(round(2 * WITNESS_RANGE / WITNESS_STEP)) + 1
    x = np.linspace(-WITNESS_RANGE, WITNESS_RANGE, n)
    keep = np.ones_like(x, dtype=bool)
    for x0, max_order in spec.singular:
        if max_order < order:
            keep &= np.abs(x - x0) >= KINK_MARGIN
    return x[keep]


def _derivative_fn(spec: ActivationSpec, order: int) -> Callable:
    analytic = spec.d1 if order == 1 else spec.d2
    if analytic is not None:
        return analytic
    return lambda x: central_difference(spec.fn, order, x)


def find_curvature_point(spec: ActivationSpec) -> CurvaturePoint | None:
    """Maximiser of |rho''| on [-10, 10], away from points where rho'' does not exist."""
    d2 = _derivative_fn(spec, 2)
    x0, val = grid_argmax(lambda t: np.abs(d2(t)), _allowed_grid(spec, 2))
    if not val > 1e-8 or not math.isfinite(val):
        return None
    return CurvaturePoint(x0, float(d2(np.array([x0]))[0]))


def find_slope_point(spec: ActivationSpec, preferred: float | None = None) -> SlopePoint | None:
    """x1 with rho'(x1) != 0: the preferred point if given, else the maximiser of |rho'| on [-10, 10]."""
    d1 = _derivative_fn(spec, 1)
    if preferred is not None:
        v = float(d1(np.array([preferred]))[0])
        if v != 0.0 and math.isfinite(v):
            return SlopePoint(float(preferred), v)
    x1, val = grid_argmax(lambda t: np.abs(d1(t)), _allowed_grid(spec, 1))
    if not val > 1e-8 or not math.isfinite(val):
        return None
    return SlopePoint(x1, float(d1(np.array([x1]))[0]))


# numeric probing for user specs

_FAR = (1e4, 1e6)


def _converged(a: float, b: float, tol: float = 1e-3) -> bool:
    return math.isfinite(a) and math.isfinite(b) and abs(a - b) <= tol * max(1.0, abs(b))


def _probe(spec: ActivationSpec) -> ClassInfo:
    f = lambda t: float(spec.fn(np.array([t], dtype=np.float64))[0])  # noqa: E731
    lo = [f(-r) for r in _FAR]
    hi = [f(r) for r in _FAR]
    if _converged(*lo) and _converged(*hi) and abs(lo[1] - hi[1]) > 1e-6:
        return ClassInfo(("A3",), asymptotes=(lo[1], hi[1]))
    b1 = f(0.0)
    h = lambda x: (np.asarray(spec.fn(np.asarray(x, dtype=np.float64))) - b1) / x  # noqa: E731
    hl = [float(h(np.array([-r]))[0]) for r in _FAR]
    hh = [float(h(np.array([r]))[0]) for r in _FAR]
    if _converged(*hl) and _converged(*hh) and abs(hl[1] - hh[1]) > 1e-6:
        # secant slopes drop the constant term that biases h(R) by b1 / R
        R = _FAR[-1]
        L1 = (f(-2.0 * R) - f(-R)) / -R
        L2 = (f(2.0 * R) - f(R)) / R
        # snap limits that are zero up to the 1/x decay of the far probe
        L1 = 0.0 if abs(L1) < 1e-5 else L1
        L2 = 0.0 if abs(L2) < 1e-5 else L2

        def h_fn(x, _b1=b1):
            x = np.asarray(x, dtype=np.float64)
            xs = np.where(x == 0.0, 1.0, x)
            at0 = float(_derivative_fn(spec, 1)(np.array([0.0]))[0])
            return np.where(x == 0.0, at0, (spec.fn(xs) - _b1) / xs)

        sd = SDecomp(0.0, b1, L1, L2, h_fn, gap_tails=None)
        return ClassInfo(("A2tilde",) if L1 * L2 == 0.0 else ("A2",), s_decomp=sd)
    raise NotInA(f"{spec.name}: numeric probing found no kink, S-shaped decomposition or asymptotes")


_CACHE: dict[tuple, Classification] = {}


def classify(spec: ActivationSpec) -> Classification:
    """Memberships and witnesses. Built-ins are table-driven; user specs are probed and flagged."""
    key = (spec.key(), id(spec.fn))
    cached = _CACHE.get(key)
    if cached is not None:
        return cached
    flags: tuple[str, ...] = ()
    info = spec.info
    if info is None:
        info = _probe(spec)
        flags = ("probed",)
        warnings.warn(f"{spec.name}: classification from numeric probing", stacklevel=2)
    curvature = find_curvature_point(spec)
    if "A3" in info.memberships and curvature is None:
        raise NotInA(f"{spec.name}: bounded but rho'' vanishes on the search range")
    slope = find_slope_point(spec, info.slope_x)
    memberships = info.memberships
    if not memberships:
        raise NotInA(spec.name)
    result = Classification(spec=spec, memberships=memberships, kink=info.kink, s_decomp=info.s_decomp,
                            curvature_point=curvature, slope_point=slope, asymptotes=info.asymptotes,
                            flags=flags)
    _CACHE[key] = result
    return result


# S-shape normalisation

@dataclass(frozen=True)
class NormalizedDecomposition:
    """Affine maps turning rho into y * h_hat(y) with h_hat(-inf) = 0 and h_hat(+inf) = 1:

        y * h_hat(y) = out_scale * rho(in_scale * y + in_shift) + out_shift - linear_coeff * y

    ``linear_coeff`` is zero on the single-neuron path (L1 * L2 = 0).
    """

    in_scale: float
    in_shift: float
    out_scale: float
    out_shift: float
    linear_coeff: float
    w0: float
    w1: float
    sign: float
    tilde: bool
    h_hat: Callable = field(repr=False, compare=False)


TAIL_PROBE = 1e6
TAIL_TOL = 1e-4


def s_shape_normalize(cls: Classification) -> NormalizedDecomposition:
    sd = cls.s_decomp
    if sd is None:
        raise NotInA(f"{cls.spec.name}: no S-shaped decomposition")
    L1, L2, h = sd.L1, sd.L2, sd.h
    if L1 == L2:
        raise NotInA(f"{cls.spec.name}: h has equal limits")
    if sd.tilde:
        w0 = L1 + L2
        w1 = 1.0 if L1 == 0.0 else -1.0
        s = math.copysign(1.0, w0 * w1)
        in_scale = w1 / abs(w0)
        in_shift = -sd.b0
        nd = NormalizedDecomposition(
            in_scale=in_scale, in_shift=in_shift, out_scale=s, out_shift=-s * sd.b1, linear_coeff=0.0,
            w0=w0, w1=w1, sign=s, tilde=True,
            h_hat=lambda y: h(in_scale * np.asarray(y, dtype=np.float64) + in_shift) / w0)
    else:
        d = L2 - L1
        nd = NormalizedDecomposition(
            in_scale=1.0, in_shift=-sd.b0, out_scale=1.0 / d, out_shift=-sd.b1 / d, linear_coeff=L1 / d,
            w0=d, w1=1.0, sign=1.0, tilde=False,
            h_hat=lambda y: (h(np.asarray(y, dtype=np.float64) - sd.b0) - L1) / d)
    tails = nd.h_hat(np.array([-TAIL_PROBE, TAIL_PROBE]))
    if not (abs(tails[0]) <= TAIL_TOL and abs(tails[1] - 1.0) <= TAIL_TOL):
        raise LimitMismatch(f"{cls.spec.name}: normalised tails {tails.tolist()} are not close to (0, 1)")
    return nd
