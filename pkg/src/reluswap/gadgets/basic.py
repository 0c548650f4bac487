"""Building-block gadgets: k-th derivative, identity and product."""
from __future__ import annotations

import numpy as np

from reluswap.activations.classify import classify, eval_activation, eval_derivative
from reluswap.activations.registry import ActivationSpec
from reluswap.errors import EpsTooSmall, EtaTooSmall, NoCurvaturePoint, NoSlopePoint, ParameterDomainError
from reluswap.gadgets.base import EPS, GRID_POINTS_2D, Gadget, grid, scalar_error, sup_abs
from reluswap.gadgets.binom import derivative_coefficients
from reluswap.net_ir import IDENTITY, ActivationRef, Layer, Network, eval_network


def eta_floor(k: int) -> float:
    """Smallest usable step for a k-th difference: below it rounding dominates."""
    return EPS ** (1.0 / (k + 2)) if k >= 1 else 0.0


PRODUCT_EPS_FLOOR = EPS ** 0.25


def _tag(spec: ActivationSpec) -> ActivationRef:
    return ActivationRef.of(spec)


def derivative_net(spec: ActivationSpec, k: int, eta: float) -> Network:
    coeffs = derivative_coefficients(k)
    scale = (-eta) ** k
    w0 = np.ones((k + 1, 1))
    b0 = np.array([l * eta for l in range(k + 1)])
    w1 = np.array([[c / scale for c in coeffs]])
    return Network(1, (Layer(w0, b0, _tag(spec)), Layer(w1, np.zeros(1), IDENTITY)))


def derivative_gadget(spec: ActivationSpec, k: int, eta: float, M: float = 1.0) -> Gadget:
    """psi(x) = sum_l (-1)^l C(k, l) rho(x + l eta) / (-eta)^k, a forward k-th difference.

    The reported error is measured against rho^(k) on [-M, M] when a reference exists
    (k <= 2); for higher k it is the change from halving eta.
    """
    if k < 0:
        raise ParameterDomainError(f"derivative order must be non-negative, got {k}")
    if not eta > 0:
        raise ParameterDomainError(f"eta must be positive, got {eta}")
    if k >= 1 and eta < eta_floor(k):
        raise EtaTooSmall(f"eta={eta:g} is below the rounding floor {eta_floor(k):.3g} for order {k}")
    net = derivative_net(spec, k, eta)
    if k <= 2:
        err = scalar_error(net, lambda x: eval_derivative(spec, k, x), M)
        method = "reference"
    else:
        half = derivative_net(spec, k, max(eta / 2.0, eta_floor(k)))
        x = grid(M)[:, None]
        err = sup_abs(eval_network(net, x) - eval_network(half, x))
        method = "step-halving"
    return Gadget(net, f"Derivative({k})", eta, M, err, params={"k": k, "eta": eta, "error_method": method})


def _slope_point(spec: ActivationSpec, x1: float | None) -> tuple[float, float]:
    if x1 is not None:
        d = eval_derivative(spec, 1, x1)
        if d == 0.0:
            raise NoSlopePoint(f"{spec.name}: rho'({x1}) = 0")
        return float(x1), d
    sp = classify(spec).slope_point
    if sp is None:
        raise NoSlopePoint(f"{spec.name}: no point with rho' != 0 found")
    return sp.x1, sp.rho_p


def identity_layers(spec: ActivationSpec, eta: float, x1: float, rho_p: float):
    """Hidden row (weight, bias) and output (coefficient, bias) of g(x) = (rho(x1 + eta x) - rho(x1)) / (eta rho'(x1))."""
    c = 1.0 / (eta * rho_p)
    # written as -(c * rho(x1)) so that the output sums to exactly zero at x = 0
    return (eta, x1), (c, -(c * eval_activation(spec, x1)))


def identity_gadget(spec: ActivationSpec, eta: float, M: float = 1.0, x1: float | None = None) -> Gadget:
    if not eta > 0:
        raise ParameterDomainError(f"eta must be positive, got {eta}")
    x1, rho_p = _slope_point(spec, x1)
    (w, b), (c, cb) = identity_layers(spec, eta, x1, rho_p)
    net = Network(1, (Layer([[w]], [b], _tag(spec)), Layer([[c]], [cb], IDENTITY)))
    err = scalar_error(net, lambda x: x, M)
    return Gadget(net, "Identity", eta, M, err, params={"eta": eta, "x1": x1, "rho_p": rho_p})


def _curvature_point(spec: ActivationSpec, x0: float | None) -> tuple[float, float]:
    if x0 is not None:
        d = eval_derivative(spec, 2, x0)
        if d == 0.0:
            raise NoCurvaturePoint(f"{spec.name}: rho''({x0}) = 0")
        return float(x0), d
    cp = classify(spec).curvature_point
    if cp is None:
        raise NoCurvaturePoint(f"{spec.name}: no point with rho'' != 0 found")
    return cp.x0, cp.rho_pp


def product_output(spec: ActivationSpec, eps_g: float, x0: float, rho_pp: float):
    """Output row and bias for the hidden order [x0 + e x, x0 + e y, x0 + e x + e y].

    The fixed pairwise summation order gives (-c r_b - c r_c) + (c r_a + c r_0); on either
    axis the two halves are exact negatives, so the output is exactly zero there.
    """
    c1 = 1.0 / (eps_g * eps_g * rho_pp)
    return np.array([-c1, -c1, c1]), c1 * eval_activation(spec, x0)


def product_gadget(spec: ActivationSpec, eps_g: float, M: float = 1.0, x0: float | None = None) -> Gadget:
    """Two-input gadget Gamma(x, y) ~ x y from four evaluations of rho around a curvature point."""
    if not eps_g > 0:
        raise ParameterDomainError(f"eps_g must be positive, got {eps_g}")
    if eps_g < PRODUCT_EPS_FLOOR:
        raise EpsTooSmall(f"eps_g={eps_g:g} is below the rounding floor {PRODUCT_EPS_FLOOR:.3g}")
    x0, rho_pp = _curvature_point(spec, x0)
    w0 = np.array([[eps_g, 0.0], [0.0, eps_g], [eps_g, eps_g]])
    b0 = np.full(3, x0)
    w1, b1 = product_output(spec, eps_g, x0, rho_pp)
    net = Network(2, (Layer(w0, b0, _tag(spec)), Layer(w1[None, :], [b1], IDENTITY)))
    g = grid(M, GRID_POINTS_2D)
    xx, yy = np.meshgrid(g, g, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    err = sup_abs(eval_network(net, pts)[:, 0] - pts[:, 0] * pts[:, 1])
    return Gadget(net, "Product", eps_g, M, err, params={"eps_g": eps_g, "x0": x0, "rho_pp": rho_pp})
