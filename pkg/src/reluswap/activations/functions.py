"""Closed-form activation functions and their first two derivatives.

Everything here is vectorised over numpy arrays and written so that no finite input in
[-1e6, 1e6] overflows: exponentials only ever see non-positive arguments.
"""
from __future__ import annotations

import numpy as np
from scipy.special import expit, ndtr

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)
LN2 = float(np.log(2.0))


def _sech2(x):
    """sech(x)^2 = 4e / (1 + e)^2 with e = exp(-2|x|); 1 - tanh^2 cancels in the tails."""
    e = np.exp(-2.0 * np.abs(x))
    return 4.0 * e / ((1.0 + e) * (1.0 + e))


def _neg_exp(x):
    """exp(min(x, 0)), used inside np.where branches that only keep x <= 0."""
    return np.exp(np.minimum(x, 0.0))


# piecewise-linear family

def relu(x):
    return np.maximum(x, 0.0)


def relu_d1(x):
    return np.where(x > 0, 1.0, 0.0)


def relu_d2(x):
    return np.zeros_like(x)


def leaky_relu(x, alpha):
    return np.where(x >= 0, x, alpha * x)


def leaky_relu_d1(x, alpha):
    return np.where(x >= 0, 1.0, alpha)


def relu2(x):
    r = np.maximum(x, 0.0)
    return r * r


def relu2_d1(x):
    return 2.0 * np.maximum(x, 0.0)


def relu2_d2(x):
    return np.where(x > 0, 2.0, 0.0)


# exponential linear family

def elu(x, alpha):
    return np.where(x >= 0, x, alpha * np.expm1(np.minimum(x, 0.0)))


def elu_d1(x, alpha):
    return np.where(x >= 0, 1.0, alpha * _neg_exp(x))


def elu_d2(x, alpha):
    return np.where(x >= 0, 0.0, alpha * _neg_exp(x))


def elu_h(x, alpha):
    """h with elu(x) = x * h(x); continuous at 0 where h(0-) = alpha."""
    xs = np.where(x < 0, x, -1.0)
    neg = alpha * np.expm1(xs) / xs
    return np.where(x >= 0, 1.0, np.where(x > -1e-300, alpha, neg))


def celu(x, alpha):
    return np.where(x >= 0, x, alpha * np.expm1(np.minimum(x, 0.0) / alpha))


def celu_d1(x, alpha):
    return np.where(x >= 0, 1.0, _neg_exp(x / alpha))


def celu_d2(x, alpha):
    return np.where(x >= 0, 0.0, _neg_exp(x / alpha) / alpha)


def celu_h(x, alpha):
    xs = np.where(x < 0, x, -1.0)
    neg = alpha * np.expm1(xs / alpha) / xs
    return np.where(x >= 0, 1.0, np.where(x > -1e-300, 1.0, neg))


# smooth ReLU variants

def softplus(x):
    return np.logaddexp(0.0, x)


def softplus_d1(x):
    return expit(x)


def softplus_d2(x):
    return expit(x) * expit(-x)


def softplus_h(x):
    """(softplus(x) - ln 2) / x with the removable singularity filled in."""
    small = np.abs(x) < 1e-5
    xs = np.where(small, 1.0, x)
    series = 0.5 + x / 8.0 - x ** 3 / 192.0
    return np.where(small, series, (np.logaddexp(0.0, xs) - LN2) / xs)


def gelu(x, mu, sigma):
    return x * ndtr((x - mu) / sigma)


def gelu_d1(x, mu, sigma):
    z = (x - mu) / sigma
    return ndtr(z) + x * _INV_SQRT_2PI * np.exp(-0.5 * z * z) / sigma


def gelu_d2(x, mu, sigma):
    z = (x - mu) / sigma
    pdf = _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    return 2.0 * pdf / sigma - x * z * pdf / (sigma * sigma)


def gelu_h(x, mu, sigma):
    return ndtr((x - mu) / sigma)


def silu(x):
    return x * expit(x)


def silu_d1(x):
    s = expit(x)
    return s + x * s * expit(-x)


def silu_d2(x):
    s = expit(x)
    p = s * expit(-x)
    return 2.0 * p + x * p * (1.0 - 2.0 * s)


def swish(x, beta):
    return x * expit(beta * x)


def swish_d1(x, beta):
    s = expit(beta * x)
    return s + beta * x * s * expit(-beta * x)


def swish_d2(x, beta):
    s = expit(beta * x)
    p = s * expit(-beta * x)
    return 2.0 * beta * p + beta * beta * x * p * (1.0 - 2.0 * s)


def swish_h(x, beta):
    return expit(beta * x)


def mish(x):
    return x * np.tanh(np.logaddexp(0.0, x))


def mish_d1(x):
    sp = np.logaddexp(0.0, x)
    return np.tanh(sp) + x * _sech2(sp) * expit(x)


def mish_d2(x):
    sp = np.logaddexp(0.0, x)
    t = np.tanh(sp)
    s = expit(x)
    u = _sech2(sp) * s
    return 2.0 * u + x * u * (expit(-x) - 2.0 * t * s)


def mish_h(x):
    return np.tanh(np.logaddexp(0.0, x))


# bounded S-shaped family

def sigmoid(x):
    return expit(x)


def sigmoid_d1(x):
    return expit(x) * expit(-x)


def sigmoid_d2(x):
    s = expit(x)
    return s * expit(-x) * (1.0 - 2.0 * s)


def tanh(x):
    return np.tanh(x)


def tanh_d1(x):
    return _sech2(x)


def tanh_d2(x):
    return -2.0 * np.tanh(x) * _sech2(x)


def arctan(x):
    return np.arctan(x)


def arctan_d1(x):
    return 1.0 / (1.0 + x * x)


def arctan_d2(x):
    q = 1.0 + x * x
    return -2.0 * x / (q * q)


def softsign(x):
    return x / (1.0 + np.abs(x))


def softsign_d1(x):
    q = 1.0 + np.abs(x)
    return 1.0 / (q * q)


def softsign_d2(x):
    q = 1.0 + np.abs(x)
    return -2.0 * np.sign(x) / (q * q * q)


def dsilu(x):
    return expit(x) * (1.0 + x * expit(-x))


def dsilu_d1(x):
    s = expit(x)
    p = s * expit(-x)
    return p * (2.0 + x * (1.0 - 2.0 * s))


def dsilu_d2(x):
    s = expit(x)
    p = s * expit(-x)
    c = 1.0 - 2.0 * s
    return p * (c * (3.0 + x * c) - 2.0 * x * p)


def _quiet(fn):
    # both np.where branches are evaluated; the discarded one may divide by zero
    def wrapped(*args, **kwargs):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return fn(*args, **kwargs)
    wrapped.__name__ = fn.__name__
    wrapped.__doc__ = fn.__doc__
    return wrapped


def _srs_parts(x, beta):
    # e = exp(-|x|/beta); for x >= 0 it multiplies the x/alpha term, else it rescales both
    e = np.exp(-np.abs(x) / beta)
    return e, x >= 0


@_quiet
def srs(x, alpha, beta):
    e, pos = _srs_parts(x, beta)
    # x >= 0: x / (x/alpha + e);  x < 0: x e / (x e / alpha + 1) with e = exp(x/beta)
    return np.where(pos, x / (x / alpha + e), x * e / (x * e / alpha + 1.0))


@_quiet
def srs_d1(x, alpha, beta):
    e, pos = _srs_parts(x, beta)
    num = 1.0 + x / beta
    d_pos = x / alpha + e
    d_neg = x * e / alpha + 1.0
    return np.where(pos, e * num / (d_pos * d_pos), e * num / (d_neg * d_neg))


@_quiet
def srs_d2(x, alpha, beta):
    e, pos = _srs_parts(x, beta)
    # x >= 0, with D = x/alpha + e:  (N' D - 2 N D') / D^3
    d = x / alpha + e
    n = e * (1.0 + x / beta)
    n1 = -e * x / (beta * beta)
    d1 = 1.0 / alpha - e / beta
    pos_val = (n1 * d - 2.0 * n * d1) / (d * d * d)
    # x < 0, F = exp(x/beta), Dt = x F / alpha + 1:  F (-x Dt / beta^2 - 2 (1 + x/beta) Dt') / Dt^3
    dt = x * e / alpha + 1.0
    dt1 = e / alpha - 1.0 / beta
    neg_val = e * (-x * dt / (beta * beta) - 2.0 * (1.0 + x / beta) * dt1) / (dt * dt * dt)
    return np.where(pos, pos_val, neg_val)


# x * h(x) composites with an S-shaped h

def x_dsilu(x):
    return x * dsilu(x)


def x_dsilu_d1(x):
    return dsilu(x) + x * dsilu_d1(x)


def x_dsilu_d2(x):
    return 2.0 * dsilu_d1(x) + x * dsilu_d2(x)


def softsign_shift(x):
    # (softsign + 1) / 2 without cancellation for x << 0
    a = np.abs(x)
    return (1.0 + x + a) / (2.0 * (1.0 + a))


def x_softsign_shift(x):
    return x * softsign_shift(x)


def x_softsign_shift_d1(x):
    return softsign_shift(x) + 0.5 * x * softsign_d1(x)


def x_softsign_shift_d2(x):
    return softsign_d1(x) + 0.5 * x * softsign_d2(x)


def arctan_shift(x):
    # arctan(x) + pi/2 = arctan(-1/x) for x < 0, which keeps the left tail accurate
    left = np.arctan(-1.0 / np.where(x < 0, x, -1.0)) / np.pi
    return np.where(x < 0, left, np.arctan(x) / np.pi + 0.5)


def x_arctan_shift(x):
    return x * arctan_shift(x)


def x_arctan_shift_d1(x):
    return arctan_shift(x) + x * arctan_d1(x) / np.pi


def x_arctan_shift_d2(x):
    return 2.0 * arctan_d1(x) / np.pi + x * arctan_d2(x) / np.pi


def x_softsign(x):
    return x * softsign(x)


def x_softsign_d1(x):
    return softsign(x) + x * softsign_d1(x)


def x_softsign_d2(x):
    return 2.0 * softsign_d1(x) + x * softsign_d2(x)


def x_arctan(x):
    return x * np.arctan(x)


def x_arctan_d1(x):
    return np.arctan(x) + x * arctan_d1(x)


def x_arctan_d2(x):
    return 2.0 * arctan_d1(x) + x * arctan_d2(x)
