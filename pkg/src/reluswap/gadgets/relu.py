"""ReLU emulators for each activation class, with their calibration."""
from __future__ import annotations

import math

import numpy as np

from reluswap.activations.classify import Classification, eval_activation, eval_derivative, s_shape_normalize
from reluswap.errors import CalibrationFailed, NotInA, ParameterDomainError
from reluswap.gadgets.base import Gadget, calibrate, grid, relu_error, sup_abs
from reluswap.gadgets.basic import (
    PRODUCT_EPS_FLOOR, _curvature_point, _slope_point, eta_floor, identity_layers, product_output,
)
from reluswap.gadgets.binom import derivative_coefficients
from reluswap.net_ir import IDENTITY, ActivationRef, Layer, Network

# most economical first: (width, depth) factors (1,1), (2,1), (2,1), (k+2,1), (3,2)
PRIORITY = ("A2tilde", "A2", "A1k(0)", "A1k(k>=1)", "A3")


def available_paths(cls: Classification) -> list[str]:
    paths = []
    if cls.s_decomp is not None and cls.s_decomp.tilde:
        paths.append("A2tilde")
    if cls.s_decomp is not None:
        paths.append("A2")
    if cls.kink is not None:
        paths.append("A1k(0)" if cls.kink.order == 0 else "A1k(k>=1)")
    if "A3" in cls.memberships:
        paths.append("A3")
    return [p for p in PRIORITY if p in paths]


def _normalise_path(name: str) -> str:
    if name.startswith("A1k(") and name not in ("A1k(0)",):
        return "A1k(k>=1)"
    return name


def expected_shape(path: str, k: int = 0) -> tuple[int, int]:
    return {"A2tilde": (1, 1), "A2": (2, 1), "A1k(0)": (2, 1), "A1k(k>=1)": (k + 2, 1), "A3": (3, 2)}[path]


def _scalar_net(tag, hidden: list[tuple[float, float]], out: list[float], out_bias: float) -> Network:
    w0 = np.array([[w] for w, _ in hidden])
    b0 = np.array([b for _, b in hidden])
    return Network(1, (Layer(w0, b0, tag), Layer(np.array([out]), [out_bias], IDENTITY)))


# single neuron, L1 * L2 = 0

def a2tilde_net(cls: Classification, K: float) -> Network:
    nd = s_shape_normalize(cls)
    tag = ActivationRef.of(cls.spec)
    return _scalar_net(tag, [(nd.in_scale * K, nd.in_shift)], [nd.out_scale / K], nd.out_shift / K)


# two neurons, general S-shaped decomposition

def a2_net(cls: Classification, K: float, M: float) -> Network:
    nd = s_shape_normalize(cls)
    tag = ActivationRef.of(cls.spec)
    # psi_K(x) = (out_scale rho(K x + in_shift) + out_shift) / K = x h_hat(K x) + c x; the c terms
    # of psi_K(x) and psi_K(x - M) cancel up to the constant c M
    a = nd.in_scale * K
    return _scalar_net(tag, [(a, nd.in_shift), (a, nd.in_shift - a * M)],
                       [nd.out_scale / K, -nd.out_scale / K], -nd.linear_coeff * M)


# kink of order 0

def a1k0_net(cls: Classification, eps: float, M: float) -> Network:
    k = cls.kink
    tag = ActivationRef.of(cls.spec)
    c = 1.0 / (eps * (k.L2 - k.L1))
    return _scalar_net(tag, [(eps, k.x0), (eps, k.x0 - eps * M)], [c, -c], -k.L1 * M / (k.L2 - k.L1))


# kink of order k >= 1

def a1k_net(cls: Classification, eps: float, eta: float, x1: float, rho_p: float) -> Network:
    """k + 1 difference neurons around the kink plus one identity neuron cancelling the L1 slope."""
    kk = cls.kink
    k = kk.order
    spec = cls.spec
    d = kk.L2 - kk.L1
    coeffs = derivative_coefficients(k)
    scale = (-eta) ** k
    hidden = [(eps, kk.x0 + i * eta) for i in range(k + 1)]
    out = [c / (scale * d * eps) for c in coeffs]
    (iw, ib), (ic, icb) = identity_layers(spec, eta, x1, rho_p)
    hidden.append((iw, ib))
    out.append(-kk.L1 / d * ic)
    bias = -eval_derivative(spec, k, kk.x0) / (d * eps) - kk.L1 / d * icb
    return _scalar_net(ActivationRef.of(spec), hidden, out, bias)


def _a1k_eps_error(cls: Classification, eps: float, M: float) -> float:
    """Error of the difference quotient of the exact k-th derivative, before discretising it."""
    kk = cls.kink
    d = kk.L2 - kk.L1
    x = grid(M)
    q = (eval_derivative(cls.spec, kk.order, kk.x0 + eps * x) - eval_derivative(cls.spec, kk.order, kk.x0)) / eps
    return sup_abs((q - kk.L1 * x) / d - np.maximum(x, 0.0))


# bounded S-shaped, two hidden layers

def a3_net(cls: Classification, K: float, delta: float, eta: float, x0: float, rho_pp: float,
           x1: float, rho_p: float, v_scale: float = 1.0) -> Network:
    """Product gadget applied to (g1(K x), g2(x)) with g1 the rescaled activation and g2 an identity gadget.

    The product sees (u, v_scale * v) and its output is divided by v_scale, which keeps
    both factors in [-1, 1] when v_scale = 1/M.
    """
    spec = cls.spec
    L1, L2 = cls.asymptotes
    tag = ActivationRef.of(spec)
    layer0 = Layer(np.array([[K], [delta]]), np.array([0.0, x1]), tag)
    # u = (r1 - L1) / (L2 - L1), v = (r2 - rho(x1)) / (delta rho'(x1))
    su, bu = 1.0 / (L2 - L1), -L1 / (L2 - L1)
    sv = v_scale / (delta * rho_p)
    bv = -(sv * eval_activation(spec, x1))
    w1 = np.array([[eta * su, 0.0], [0.0, eta * sv], [eta * su, eta * sv]])
    b1 = np.array([x0 + eta * bu, x0 + eta * bv, x0 + eta * bu + eta * bv])
    layer1 = Layer(w1, b1, tag)
    w2, b2 = product_output(spec, eta, x0, rho_pp)
    return Network(1, (layer0, layer1, Layer(w2[None, :] / v_scale, [b2 / v_scale], IDENTITY)))


def _build(cls: Classification, path: str, M: float, tol: float) -> Gadget:
    spec = cls.spec
    if path == "A2tilde":
        r = calibrate(lambda K: _with_net(a2tilde_net(cls, K), M), tol, what=f"{spec.name} single neuron")
        return Gadget(r.value, "ReLU", r.param, M, r.error, "A2tilde", {"K": r.param})
    if path == "A2":
        r = calibrate(lambda K: _with_net(a2_net(cls, K, M), M), tol, what=f"{spec.name} two neurons")
        return Gadget(r.value, "ReLU", r.param, M, r.error, "A2", {"K": r.param})
    if path == "A1k(0)":
        r = calibrate(lambda p: _with_net(a1k0_net(cls, 1.0 / p, M), M), tol, what=f"{spec.name} kink")
        eps = 1.0 / r.param
        return Gadget(r.value, "ReLU", eps, M, r.error, "A1k(0)", {"eps": eps})
    if path == "A1k(k>=1)":
        return _build_a1k(cls, M, tol)
    if path == "A3":
        return _build_a3(cls, M, tol)
    raise NotInA(f"{spec.name}: unknown construction {path}")


def _with_net(net: Network, M: float):
    return relu_error(net, M), net


def _build_a1k(cls: Classification, M: float, tol: float) -> Gadget:
    spec = cls.spec
    k = cls.kink.order
    x1, rho_p = _slope_point(spec, None)
    eps_r = calibrate(lambda p: (_a1k_eps_error(cls, 1.0 / p, M), None), tol / 2.0,
                      what=f"{spec.name} kink scale")
    eps = 1.0 / eps_r.param
    floor = eta_floor(k)
    r = calibrate(lambda p: _with_net(a1k_net(cls, eps, 1.0 / p, x1, rho_p), M), tol, p_max=1.0 / floor,
                  what=f"{spec.name} order-{k} difference")
    eta = 1.0 / r.param
    return Gadget(r.value, "ReLU", eps, M, r.error, f"A1k({k})",
                  {"eps": eps, "eta": eta, "k": k, "x1": x1})


def _build_a3(cls: Classification, M: float, tol: float) -> Gadget:
    spec = cls.spec
    L1, L2 = cls.asymptotes
    x0, rho_pp = _curvature_point(spec, None)
    x1, rho_p = _slope_point(spec, None)
    x = grid(M)
    relu = np.maximum(x, 0.0)
    g1 = lambda t: (eval_activation(spec, t) - L1) / (L2 - L1)  # noqa: E731
    k0 = max(1.0, sup_abs(g1(np.linspace(-100.0, 100.0, 20001))))
    r1 = eval_activation(spec, x1)

    def g2(delta):
        return (eval_activation(spec, x1 + delta * x) - r1) / (delta * rho_p)

    d_r = calibrate(lambda p: (sup_abs(g2(1.0 / p) - x), None), tol / (4.0 * k0), what=f"{spec.name} identity")
    delta = 1.0 / d_r.param
    g2v = g2(delta)
    k_r = calibrate(lambda K: (sup_abs(g1(K * x) * g2v - relu), None), tol / 2.0, what=f"{spec.name} step")
    K = k_r.param
    v_scale = 1.0 / max(1.0, M)
    r = calibrate(lambda p: _with_net(a3_net(cls, K, delta, 1.0 / p, x0, rho_pp, x1, rho_p, v_scale), M), tol,
                  p_max=1.0 / PRODUCT_EPS_FLOOR, what=f"{spec.name} product")
    eta = 1.0 / r.param
    return Gadget(r.value, "ReLU", K, M, r.error, "A3",
                  {"K": K, "delta": delta, "eta": eta, "x0": x0, "x1": x1, "v_scale": v_scale})


def relu_gadget(cls: Classification, M: float, tol: float, force_class: str | None = None) -> Gadget:
    """Calibrated ReLU emulator on [-M, M] with grid error <= tol.

    The cheapest available construction is used unless ``force_class`` names another one
    ("A2tilde", "A2", "A1k(0)", "A1k(k>=1)" or "A1k(<k>)", "A3"). If a construction cannot
    reach tol, the next one in priority order is tried; CalibrationFailed reports the best
    error over all of them.
    """
    if not (M > 0 and math.isfinite(M)):
        raise ParameterDomainError(f"M must be positive and finite, got {M}")
    if not tol > 0:
        raise ParameterDomainError(f"tol must be positive, got {tol}")
    paths = available_paths(cls)
    if not paths:
        raise NotInA(f"{cls.spec.name}: no construction available")
    if force_class is not None:
        want = _normalise_path(force_class)
        if want not in paths:
            raise NotInA(f"{cls.spec.name}: construction {force_class} not available (have {paths})")
        paths = [want]
    best = math.inf
    failures = []
    for path in paths:
        try:
            return _build(cls, path, M, tol)
        except CalibrationFailed as e:
            best = min(best, e.best_error)
            failures.append(f"{path}: {e.best_error:.3g}")
    raise CalibrationFailed(best, "; ".join(failures))
