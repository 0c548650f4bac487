"""Activation registry: named specs with parameters, evaluators and class metadata.

Built-in entries carry their class memberships and witnesses in a table (`ClassInfo`);
:func:`reluswap.activations.classify` reads that table and only probes numerically for
activations registered by users.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Mapping

import numpy as np

from reluswap.errors import ParameterDomainError, UnknownActivation
from reluswap.activations import functions as F

SMOOTH = "smooth"


def piecewise_smooth(k: int) -> str:
    return f"piecewise_smooth({k})"


@dataclass(frozen=True)
class Kink:
    """A point where the k-th derivative has distinct one-sided slopes L1 (left) and L2 (right)."""

    x0: float
    order: int
    L1: float
    L2: float


@dataclass(frozen=True)
class SDecomp:
    """rho(x) = (x + b0) * h(x) + b1 with h bounded and h(-inf) = L1 != L2 = h(+inf).

    ``gap_tails`` holds the limits at -inf and +inf of y * (1[y > 0] - h_hat(y)) for the
    normalised h_hat. ``center``/``scale`` locate the transition of h.
    """

    b0: float
    b1: float
    L1: float
    L2: float
    h: Callable = field(compare=False, repr=False)
    gap_tails: tuple[float, float] | None = None
    center: float = 0.0
    scale: float = 1.0

    @property
    def tilde(self) -> bool:
        return self.L1 * self.L2 == 0.0


@dataclass(frozen=True)
class ClassInfo:
    memberships: tuple[str, ...]
    kink: Kink | None = None
    s_decomp: SDecomp | None = None
    asymptotes: tuple[float, float] | None = None
    slope_x: float | None = None


@dataclass(frozen=True, eq=False)
class ActivationSpec:
    name: str
    params: tuple[tuple[str, float], ...]
    fn: Callable
    d1: Callable | None = None
    d2: Callable | None = None
    smoothness: str = SMOOTH
    # (x, highest derivative order that exists at x)
    singular: tuple[tuple[float, int], ...] = ()
    info: ClassInfo | None = None
    builtin: bool = True

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=np.float64))

    @property
    def param_dict(self) -> dict[str, float]:
        return dict(self.params)

    def key(self) -> tuple:
        return (self.name, self.params)

    def __eq__(self, other):
        return isinstance(other, ActivationSpec) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        ps = ", ".join(f"{k}={v!r}" for k, v in self.params)
        return f"ActivationSpec({self.name}{'; ' + ps if ps else ''})"


def _bind(fn, **kw):
    return partial(fn, **kw) if kw else fn


def _positive(name: str, key: str, value: float) -> None:
    if not value > 0:
        raise ParameterDomainError(f"{name}: {key} must be > 0, got {value}")


def _finite(name: str, params: Mapping[str, float]) -> None:
    for k, v in params.items():
        if not math.isfinite(v):
            raise ParameterDomainError(f"{name}: parameter {k} must be finite, got {v}")


def _relu(p):
    info = ClassInfo(("A1k(0)",), kink=Kink(0.0, 0, 0.0, 1.0), slope_x=1.0)
    return dict(fn=F.relu, d1=F.relu_d1, d2=F.relu_d2, smoothness=piecewise_smooth(0),
                singular=((0.0, 0),), info=info)


def _leaky_relu(p):
    a = p["alpha"]
    if a == 1.0:
        raise ParameterDomainError("leaky_relu: alpha=1 is the identity map, which has no kink")
    info = ClassInfo(("A1k(0)",), kink=Kink(0.0, 0, a, 1.0), slope_x=1.0)
    return dict(fn=_bind(F.leaky_relu, alpha=a), d1=_bind(F.leaky_relu_d1, alpha=a),
                d2=lambda x: np.zeros_like(x), smoothness=piecewise_smooth(0),
                singular=((0.0, 0),), info=info)


def _relu2(p):
    info = ClassInfo(("A1k(1)",), kink=Kink(0.0, 1, 0.0, 2.0), slope_x=1.0)
    return dict(fn=F.relu2, d1=F.relu2_d1, d2=F.relu2_d2, smoothness=piecewise_smooth(1),
                singular=((0.0, 1),), info=info)


def _elu_like(h, scale_out, alpha, transition, first_slope_left, second_left):
    """Kink data shared by ELU, CELU and SELU.

    The first derivative jumps at 0 unless its left limit equals the right one; in that
    case the kink moves to the second derivative.
    """
    if first_slope_left != scale_out:
        kink = Kink(0.0, 0, first_slope_left, scale_out)
        order = 0
    else:
        kink = Kink(0.0, 1, second_left, 0.0)
        order = 1
    sd = SDecomp(0.0, 0.0, 0.0, scale_out, h, gap_tails=(alpha, 0.0), scale=transition)
    info = ClassInfo((f"A1k({order})", "A2tilde"), kink=kink, s_decomp=sd, slope_x=1.0)
    return info, order


def _elu(p):
    a = p["alpha"]
    info, order = _elu_like(_bind(F.elu_h, alpha=a), 1.0, a, 1.0, a, a)
    return dict(fn=_bind(F.elu, alpha=a), d1=_bind(F.elu_d1, alpha=a), d2=_bind(F.elu_d2, alpha=a),
                smoothness=piecewise_smooth(order), singular=((0.0, order),), info=info)


def _celu(p):
    a = p["alpha"]
    _positive("celu", "alpha", a)
    info, order = _elu_like(_bind(F.celu_h, alpha=a), 1.0, a, a, 1.0, 1.0 / a)
    return dict(fn=_bind(F.celu, alpha=a), d1=_bind(F.celu_d1, alpha=a), d2=_bind(F.celu_d2, alpha=a),
                smoothness=piecewise_smooth(order), singular=((0.0, order),), info=info)


def _selu(p):
    lam, a = p["lambda"], p["alpha"]
    _positive("selu", "lambda", lam)
    h = lambda x: lam * F.elu_h(x, a)  # noqa: E731
    info, order = _elu_like(h, lam, a, 1.0, lam * a, lam * a)
    return dict(fn=lambda x: lam * F.elu(x, a), d1=lambda x: lam * F.elu_d1(x, a),
                d2=lambda x: lam * F.elu_d2(x, a), smoothness=piecewise_smooth(order),
                singular=((0.0, order),), info=info)


def _a2tilde(h, b1=0.0, tails=(0.0, 0.0), center=0.0, scale=1.0, b0=0.0):
    return ClassInfo(("A2tilde",), s_decomp=SDecomp(b0, b1, 0.0, 1.0, h, gap_tails=tails,
                                                     center=center, scale=scale))


def _softplus(p):
    return dict(fn=F.softplus, d1=F.softplus_d1, d2=F.softplus_d2,
                info=_a2tilde(F.softplus_h, b1=F.LN2, tails=(F.LN2, F.LN2)))


def _gelu(p):
    mu, sigma = p["mu"], p["sigma"]
    _positive("gelu", "sigma", sigma)
    kw = dict(mu=mu, sigma=sigma)
    return dict(fn=_bind(F.gelu, **kw), d1=_bind(F.gelu_d1, **kw), d2=_bind(F.gelu_d2, **kw),
                info=_a2tilde(_bind(F.gelu_h, **kw), center=mu, scale=sigma))


def _silu(p):
    return dict(fn=F.silu, d1=F.silu_d1, d2=F.silu_d2, info=_a2tilde(F.sigmoid))


def _swish(p):
    b = p["beta"]
    _positive("swish", "beta", b)
    return dict(fn=_bind(F.swish, beta=b), d1=_bind(F.swish_d1, beta=b), d2=_bind(F.swish_d2, beta=b),
                info=_a2tilde(_bind(F.swish_h, beta=b), scale=1.0 / b))


def _mish(p):
    return dict(fn=F.mish, d1=F.mish_d1, d2=F.mish_d2, info=_a2tilde(F.mish_h))


def _bounded(fn, d1, d2, lo, hi, singular=(), smoothness=SMOOTH):
    return dict(fn=fn, d1=d1, d2=d2, singular=singular, smoothness=smoothness,
                info=ClassInfo(("A3",), asymptotes=(lo, hi)))


def _sigmoid(p):
    return _bounded(F.sigmoid, F.sigmoid_d1, F.sigmoid_d2, 0.0, 1.0)


def _tanh(p):
    return _bounded(F.tanh, F.tanh_d1, F.tanh_d2, -1.0, 1.0)


def _arctan(p):
    return _bounded(F.arctan, F.arctan_d1, F.arctan_d2, -math.pi / 2, math.pi / 2)


def _softsign(p):
    return _bounded(F.softsign, F.softsign_d1, F.softsign_d2, -1.0, 1.0,
                    singular=((0.0, 1),), smoothness=piecewise_smooth(1))


def _dsilu(p):
    return _bounded(F.dsilu, F.dsilu_d1, F.dsilu_d2, 0.0, 1.0)


def _srs(p):
    a, b = p["alpha"], p["beta"]
    _positive("srs", "alpha", a)
    _positive("srs", "beta", b)
    # min over x of x/alpha + exp(-x/beta) is (b/a)(1 - ln(b/a)); it must stay positive
    if b / a >= math.e:
        raise ParameterDomainError(f"srs: beta/alpha must be < e so the denominator never vanishes, got {b / a}")
    kw = dict(alpha=a, beta=b)
    return _bounded(_bind(F.srs, **kw), _bind(F.srs_d1, **kw), _bind(F.srs_d2, **kw), 0.0, a)


def _x_dsilu(p):
    return dict(fn=F.x_dsilu, d1=F.x_dsilu_d1, d2=F.x_dsilu_d2, info=_a2tilde(F.dsilu))


def _x_softsign_shift(p):
    return dict(fn=F.x_softsign_shift, d1=F.x_softsign_shift_d1, d2=F.x_softsign_shift_d2,
                info=_a2tilde(F.softsign_shift, tails=(0.5, 0.5)))


def _x_arctan_shift(p):
    return dict(fn=F.x_arctan_shift, d1=F.x_arctan_shift_d1, d2=F.x_arctan_shift_d2,
                info=_a2tilde(F.arctan_shift, tails=(1.0 / math.pi, 1.0 / math.pi)))


def _x_softsign(p):
    sd = SDecomp(0.0, 0.0, -1.0, 1.0, F.softsign)
    return dict(fn=F.x_softsign, d1=F.x_softsign_d1, d2=F.x_softsign_d2,
                info=ClassInfo(("A2",), s_decomp=sd))


def _x_arctan(p):
    sd = SDecomp(0.0, 0.0, -math.pi / 2, math.pi / 2, np.arctan)
    return dict(fn=F.x_arctan, d1=F.x_arctan_d1, d2=F.x_arctan_d2,
                info=ClassInfo(("A2",), s_decomp=sd))


SELU_LAMBDA = 1.0507009873554804934193349852946
SELU_ALPHA = 1.6732632423543772848170429916717

# name -> (default parameters, builder)
_BUILTINS: dict[str, tuple[dict[str, float], Callable]] = {
    "relu": ({}, _relu),
    "leaky_relu": ({"alpha": 0.01}, _leaky_relu),
    "relu2": ({}, _relu2),
    "elu": ({"alpha": 1.0}, _elu),
    "celu": ({"alpha": 1.0}, _celu),
    "selu": ({"lambda": SELU_LAMBDA, "alpha": SELU_ALPHA}, _selu),
    "softplus": ({}, _softplus),
    "gelu": ({"mu": 0.0, "sigma": 1.0}, _gelu),
    "silu": ({}, _silu),
    "swish": ({"beta": 1.0}, _swish),
    "mish": ({}, _mish),
    "sigmoid": ({}, _sigmoid),
    "tanh": ({}, _tanh),
    "arctan": ({}, _arctan),
    "softsign": ({}, _softsign),
    "dsilu": ({}, _dsilu),
    "srs": ({"alpha": 5.0, "beta": 3.0}, _srs),
    "x_dsilu": ({}, _x_dsilu),
    "x_softsign_shift": ({}, _x_softsign_shift),
    "x_arctan_shift": ({}, _x_arctan_shift),
    "x_softsign": ({}, _x_softsign),
    "x_arctan": ({}, _x_arctan),
}

# the seventeen activations from the standard list, in order
CORE_ACTIVATIONS = (
    "relu", "leaky_relu", "relu2", "elu", "celu", "selu", "softplus", "gelu", "silu",
    "swish", "mish", "sigmoid", "tanh", "arctan", "softsign", "dsilu", "srs",
)


class Registry:
    """Name -> activation factory. Built-ins are fixed; users may add new names."""

    def __init__(self):
        self._user: dict[str, ActivationSpec] = {}
        self._cache: dict[tuple, ActivationSpec] = {}

    def names(self) -> list[str]:
        return list(_BUILTINS) + list(self._user)

    def __contains__(self, name: str) -> bool:
        return name in _BUILTINS or name in self._user

    def get(self, name: str, params: Mapping[str, float] | None = None) -> ActivationSpec:
        params = dict(params or {})
        if name in self._user:
            if params:
                raise ParameterDomainError(f"{name}: user activations take no parameters")
            return self._user[name]
        if name not in _BUILTINS:
            raise UnknownActivation(f"unknown activation {name!r}")
        defaults, builder = _BUILTINS[name]
        unknown = set(params) - set(defaults)
        if unknown:
            raise ParameterDomainError(f"{name}: unknown parameter(s) {sorted(unknown)}")
        full = {**defaults, **{k: float(v) for k, v in params.items()}}
        _finite(name, full)
        key = (name, tuple(sorted(full.items())))
        spec = self._cache.get(key)
        if spec is None:
            spec = ActivationSpec(name=name, params=key[1], builtin=True, **builder(full))
            self._cache[key] = spec
        return spec

    def register(self, name: str, fn: Callable, d1: Callable | None = None, d2: Callable | None = None,
                 *, singular: tuple[tuple[float, int], ...] = (), smoothness: str = SMOOTH) -> ActivationSpec:
        """Add a user activation. It is classified by numeric probing, not by table."""
        if name in _BUILTINS or name in ("identity",):
            raise ParameterDomainError(f"cannot redefine built-in activation {name!r}")
        spec = ActivationSpec(name=name, params=(), fn=fn, d1=d1, d2=d2, smoothness=smoothness,
                              singular=tuple(singular), info=None, builtin=False)
        self._user[name] = spec
        return spec

    def unregister(self, name: str) -> None:
        self._user.pop(name, None)


REGISTRY = Registry()


def get_activation(name: str, params: Mapping[str, float] | None = None) -> ActivationSpec:
    return REGISTRY.get(name, params)


def register_activation(name: str, fn: Callable, d1: Callable | None = None, d2: Callable | None = None,
                        **kw) -> ActivationSpec:
    return REGISTRY.register(name, fn, d1, d2, **kw)
