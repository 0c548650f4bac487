import importlib
import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reluswap.activations import (
    CORE_ACTIVATIONS, REGISTRY, classify, derivative_method, eval_activation, eval_derivative, get_activation,
    register_activation, s_shape_normalize,
)
_classify_module = importlib.import_module("reluswap.activations.classify")
from reluswap.activations.classify import central_difference
from reluswap.errors import AtKink, LimitMismatch, NotInA, ParameterDomainError, UnknownActivation

mp.mp.dps = 40

ALL = REGISTRY.names()
A2TILDE = ["elu", "celu", "selu", "softplus", "gelu", "silu", "swish", "mish", "x_dsilu", "x_softsign_shift",
           "x_arctan_shift"]
A3 = ["sigmoid", "tanh", "arctan", "softsign", "dsilu", "srs"]


def mp_sigmoid(x):
    return 1 / (1 + mp.exp(-x))


# high-precision references, written from the textbook definitions
MP = {
    "relu": lambda x: max(x, 0),
    "leaky_relu": lambda x: x if x >= 0 else mp.mpf("0.01") * x,
    "relu2": lambda x: max(x, 0) ** 2,
    "elu": lambda x: x if x >= 0 else mp.expm1(x),
    "celu": lambda x: x if x >= 0 else mp.expm1(x),
    "selu": lambda x: mp.mpf("1.0507009873554804934193349852946") * (
        x if x >= 0 else mp.mpf("1.6732632423543772848170429916717") * mp.expm1(x)),
    "softplus": lambda x: mp.log1p(mp.exp(x)),
    "gelu": lambda x: x * mp.ncdf(x),
    "silu": lambda x: x * mp_sigmoid(x),
    "swish": lambda x: x * mp_sigmoid(x),
    "mish": lambda x: x * mp.tanh(mp.log1p(mp.exp(x))),
    "sigmoid": mp_sigmoid,
    "tanh": mp.tanh,
    "arctan": mp.atan,
    "softsign": lambda x: x / (1 + abs(x)),
    "dsilu": lambda x: mp_sigmoid(x) * (1 + x * (1 - mp_sigmoid(x))),
    "srs": lambda x: x / (x / 5 + mp.exp(-x / 3)),
    "x_dsilu": lambda x: x * mp_sigmoid(x) * (1 + x * (1 - mp_sigmoid(x))),
    "x_softsign_shift": lambda x: x * (x / (1 + abs(x)) / 2 + mp.mpf(1) / 2),
    "x_arctan_shift": lambda x: x * (mp.atan(x) / mp.pi + mp.mpf(1) / 2),
    "x_softsign": lambda x: x * x / (1 + abs(x)),
    "x_arctan": lambda x: x * mp.atan(x),
}


def test_registry_has_every_entry():
    assert set(MP) == set(ALL)
    assert len(CORE_ACTIVATIONS) == 17 and set(CORE_ACTIVATIONS) <= set(ALL)


def test_softplus_at_zero():
    assert eval_activation(get_activation("softplus"), 0.0) == 0.6931471805599453


def test_gelu_and_mish_at_zero():
    assert eval_activation(get_activation("gelu"), 0.0) == 0.0
    assert eval_activation(get_activation("mish"), 0.0) == 0.0


MONOTONE = ["relu", "leaky_relu", "relu2", "elu", "celu", "selu", "softplus", "sigmoid", "tanh", "arctan",
            "softsign", "x_softsign_shift", "x_arctan_shift"]
NON_MONOTONE = sorted(set(ALL) - set(MONOTONE))


def _mp_ref(name, x):
    return float(MP[name](mp.mpf(float(x))))


@pytest.mark.parametrize("name", MONOTONE)
def test_monotone_values_within_four_ulp(name):
    xs = np.linspace(-50, 50, 801)
    got = eval_activation(get_activation(name), xs)
    for x, g in zip(xs, got):
        ref = _mp_ref(name, x)
        assert abs(g - ref) <= 4 * math.ulp(ref), (x, g, ref)


@pytest.mark.parametrize("name", NON_MONOTONE)
def test_non_monotone_values_close(name):
    # these cancel (1 + x(1 - s), x * Phi(x) deep in the tail); accuracy is bounded by conditioning
    xs = np.linspace(-50, 50, 801)
    got = eval_activation(get_activation(name), xs)
    for x, g in zip(xs, got):
        ref = _mp_ref(name, x)
        assert abs(g - ref) <= 1e-12 * abs(ref) + 1e-300, (x, g, ref)


@pytest.mark.parametrize("name", ALL)
def test_finite_on_wide_range(name):
    x = np.concatenate([np.linspace(-1e6, 1e6, 20001), [-1e6, -710.0, -709.0, 709.0, 710.0, 1e6]])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        y = eval_activation(get_activation(name), x)
    assert np.all(np.isfinite(y))


def test_sigmoid_first_and_second_derivative_at_zero():
    s = get_activation("sigmoid")
    assert eval_derivative(s, 1, 0.0) == 0.25
    assert eval_derivative(s, 2, 0.0) == 0.0


def test_sigmoid_second_derivative_at_one():
    ref = float(mp.diff(mp_sigmoid, 1, 2))
    got = eval_derivative(get_activation("sigmoid"), 2, 1.0)
    assert got == pytest.approx(-0.09085774, abs=1e-8)
    assert got == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("name", ALL)
def test_analytic_derivatives_match_high_precision(name):
    spec = get_activation(name)
    kinks = [x0 for x0, _ in spec.singular]
    for x in np.linspace(-7.3, 7.9, 23):
        if any(abs(x - k) < 1e-3 for k in kinks):
            continue
        for order in (1, 2):
            ref = float(mp.diff(MP[name], mp.mpf(float(x)), order))
            assert eval_derivative(spec, order, x) == pytest.approx(ref, rel=1e-9, abs=1e-12), (x, order)


def test_derivative_method_reported():
    assert derivative_method(get_activation("tanh"), 1) == "analytic"
    spec = register_activation("cube_tmp", lambda x: x ** 3)
    try:
        assert derivative_method(spec, 2) == "central_difference"
        assert eval_derivative(spec, 1, 2.0) == pytest.approx(12.0, rel=1e-9)
        assert eval_derivative(spec, 2, 2.0) == pytest.approx(12.0, rel=1e-6)
    finally:
        REGISTRY.unregister("cube_tmp")


def test_central_difference_steps():
    # exact for quadratics up to rounding, so the step size choice shows only through rounding
    f = lambda x: 3.0 * x * x  # noqa: E731
    assert central_difference(f, 1, 1e4) == pytest.approx(6e4, rel=1e-9)
    assert central_difference(f, 2, 1.0) == pytest.approx(6.0, rel=1e-6)


@pytest.mark.parametrize("name, order", [("relu", 1), ("relu2", 2), ("softsign", 2), ("leaky_relu", 2)])
def test_at_kink(name, order):
    with pytest.raises(AtKink):
        eval_derivative(get_activation(name), order, 0.0)


def test_relu2_first_derivative_exists_at_kink():
    assert eval_derivative(get_activation("relu2"), 1, 0.0) == 0.0


@pytest.mark.parametrize("name, params", [
    ("celu", {"alpha": 0.0}), ("selu", {"lambda": -1.0}), ("srs", {"alpha": -1.0}), ("srs", {"beta": 0.0}),
    ("gelu", {"sigma": -1.0}), ("swish", {"beta": 0.0}), ("leaky_relu", {"alpha": 1.0}),
    ("srs", {"alpha": 1.0, "beta": 3.0}), ("gelu", {"sigma": float("nan")}), ("elu", {"gamma": 1.0}),
])
def test_parameter_domains(name, params):
    with pytest.raises(ParameterDomainError):
        get_activation(name, params)


def test_unknown_name():
    with pytest.raises(UnknownActivation):
        get_activation("swishy")


def test_builtin_names_cannot_be_redefined():
    with pytest.raises(ParameterDomainError):
        register_activation("tanh", np.tanh)


def test_specs_compare_by_name_and_parameters():
    assert get_activation("elu") == get_activation("elu", {"alpha": 1.0})
    assert get_activation("elu") != get_activation("elu", {"alpha": 2.0})
    assert hash(get_activation("gelu")) == hash(get_activation("gelu", {"mu": 0.0}))


# classification

def test_relu_kink():
    c = classify(get_activation("relu"))
    assert c.memberships == ("A1k(0)",)
    assert (c.kink.x0, c.kink.order, c.kink.L1, c.kink.L2) == (0.0, 0, 0.0, 1.0)


def test_softplus_decomposition():
    c = classify(get_activation("softplus"))
    assert c.memberships == ("A2tilde",)
    assert c.s_decomp.b0 == 0.0 and c.s_decomp.b1 == pytest.approx(math.log(2), abs=1e-16)


def test_sigmoid_curvature_point():
    c = classify(get_activation("sigmoid"))
    assert c.memberships == ("A3",) and c.asymptotes == (0.0, 1.0)
    # |s''| peaks where s = (3 -+ sqrt 3)/6, i.e. x = -+ ln(2 + sqrt 3)
    x_star = math.log(2.0 + math.sqrt(3.0))
    assert abs(abs(c.curvature_point.x0) - x_star) < 1e-6
    assert abs(c.curvature_point.rho_pp) == pytest.approx(math.sqrt(3) / 18, rel=1e-10)


@pytest.mark.parametrize("name, expected", [
    ("relu", {"A1k(0)"}), ("leaky_relu", {"A1k(0)"}), ("relu2", {"A1k(1)"}),
    ("elu", {"A1k(1)", "A2tilde"}), ("celu", {"A1k(1)", "A2tilde"}), ("selu", {"A1k(0)", "A2tilde"}),
    ("softplus", {"A2tilde"}), ("gelu", {"A2tilde"}), ("silu", {"A2tilde"}), ("swish", {"A2tilde"}),
    ("mish", {"A2tilde"}), ("sigmoid", {"A3"}), ("tanh", {"A3"}), ("arctan", {"A3"}), ("softsign", {"A3"}),
    ("dsilu", {"A3"}), ("srs", {"A3"}),
])
def test_table_memberships(name, expected):
    assert set(classify(get_activation(name)).memberships) == expected


def test_elu_with_alpha_not_one_has_order_zero_kink():
    c = classify(get_activation("elu", {"alpha": 0.5}))
    assert c.kink.order == 0 and (c.kink.L1, c.kink.L2) == (0.5, 1.0)


def test_kink_slopes_are_one_sided_derivatives():
    for name in ("relu", "leaky_relu", "relu2", "elu", "celu", "selu"):
        spec = get_activation(name)
        k = classify(spec).kink
        h = 1e-7
        left = eval_derivative(spec, k.order, k.x0 - h) if k.order else eval_activation(spec, -h) / -h
        right = eval_derivative(spec, k.order, k.x0 + h) if k.order else eval_activation(spec, h) / h
        if k.order:
            left = (eval_derivative(spec, k.order, -h) - eval_derivative(spec, k.order, -2 * h)) / h
            right = (eval_derivative(spec, k.order, 2 * h) - eval_derivative(spec, k.order, h)) / h
        assert k.L1 != k.L2
        assert left == pytest.approx(k.L1, abs=1e-5) and right == pytest.approx(k.L2, abs=1e-5), name


def test_classify_is_idempotent():
    spec = get_activation("mish")
    assert classify(spec) is classify(spec)
    assert classify(spec).to_json() == classify(get_activation("mish")).to_json()


def test_witness_points_avoid_missing_derivatives():
    c = classify(get_activation("softsign"))
    assert abs(c.curvature_point.x0) >= 1.0
    assert c.curvature_point.rho_pp != 0.0


def test_polynomial_user_spec_is_not_in_a():
    spec = register_activation("square_tmp", lambda x: x * x)
    try:
        with pytest.raises(NotInA), warnings.catch_warnings():
            warnings.simplefilter("ignore")
            classify(spec)
    finally:
        REGISTRY.unregister("square_tmp")


def test_user_bounded_spec_probed_as_a3():
    spec = register_activation("erf_tmp", lambda x: np.tanh(2 * x) + 3.0)
    try:
        with pytest.warns(UserWarning):
            c = classify(spec)
        assert c.memberships == ("A3",) and "probed" in c.flags
        assert c.asymptotes == pytest.approx((2.0, 4.0))
    finally:
        REGISTRY.unregister("erf_tmp")


# normalisation

def _mirrored_silu():
    return register_activation("mirrored_silu_tmp", lambda x: -x / (1.0 + np.exp(np.minimum(x, 700.0))))


def test_silu_normalisation_is_identity():
    nd = s_shape_normalize(classify(get_activation("silu")))
    assert (nd.in_scale, nd.in_shift, nd.out_scale, nd.out_shift, nd.linear_coeff) == (1.0, -0.0, 1.0, -0.0, 0.0)


def test_mirrored_silu_reflects_to_sigmoid():
    spec = _mirrored_silu()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            c = classify(spec)
        assert c.s_decomp.L2 == 0.0 and c.s_decomp.L1 == pytest.approx(-1.0)
        nd = s_shape_normalize(c)
        assert nd.w1 == -1.0
        y = np.linspace(-30, 30, 121)
        sig = 1.0 / (1.0 + np.exp(-y))
        assert np.max(np.abs(nd.h_hat(y) - sig)) < 1e-9
        assert abs(nd.h_hat(np.array([-1e6]))[0]) < 1e-6 and abs(nd.h_hat(np.array([1e6]))[0] - 1) < 1e-6
    finally:
        REGISTRY.unregister("mirrored_silu_tmp")


def test_softplus_normalised_h_at_zero_is_half():
    nd = s_shape_normalize(classify(get_activation("softplus")))
    assert nd.h_hat(np.array([0.0]))[0] == 0.5
    y = np.array([-3.0, 0.5, 4.0])
    assert np.allclose(nd.h_hat(y), (np.log1p(np.exp(y)) - math.log(2)) / y, rtol=1e-14)


@pytest.mark.parametrize("name", A2TILDE + ["x_softsign", "x_arctan"])
def test_normalised_tails(name):
    nd = s_shape_normalize(classify(get_activation(name)))
    lo, hi = nd.h_hat(np.array([-1e6, 1e6]))
    assert abs(lo) <= 1e-6 and abs(hi - 1.0) <= 1e-6


def test_wrong_registered_limits_raise():
    from dataclasses import replace
    c = classify(get_activation("silu"))
    bad = replace(c, s_decomp=replace(c.s_decomp, L2=2.0))
    with pytest.raises(LimitMismatch):
        s_shape_normalize(bad)


def test_selu_normalised_tail_is_alpha_over_y():
    # the exact tail of SELU's h is lambda * alpha / |y|, so the 1e-6 contract above cannot hold at 1e6
    nd = s_shape_normalize(classify(get_activation("selu")))
    lam, alpha = 1.0507009873554805, 1.6732632423543772
    assert nd.h_hat(np.array([-1e6]))[0] == pytest.approx(lam * alpha / 1e6, rel=1e-9)


# properties

FD_DPS = 150
FD_STEP = mp.mpf("1e-20")


def _mp_central(name, x, order):
    """Central difference of the high-precision definition.

    Returns (value, resolution): truncation is ~h^2 and rounding ~10^-dps * |f| / h^order,
    both far below the tolerances; the resolution only matters where the derivative is 0.
    """
    with mp.workdps(FD_DPS):
        f, x, h = MP[name], mp.mpf(float(x)), FD_STEP
        fp, fm = f(x + h), f(x - h)
        scale = max(abs(fp), abs(fm), 1)
        if order == 1:
            return float((fp - fm) / (2 * h)), float(scale * mp.mpf(10) ** (10 - FD_DPS) / h)
        return float((fp - 2 * f(x) + fm) / (h * h)), float(scale * mp.mpf(10) ** (10 - FD_DPS) / (h * h))


@pytest.mark.parametrize("name", ALL)
def test_derivatives_agree_with_central_differences(name):
    spec = get_activation(name)
    kinks = [x0 for x0, _ in spec.singular]
    xs = np.random.default_rng(20240).uniform(-30.0, 30.0, 1000)
    xs = xs[[all(abs(x - k) >= 1e-3 for k in kinks) for x in xs]]
    for order, rel in ((1, 1e-6), (2, 1e-4)):
        got = eval_derivative(spec, order, xs)
        for x, g in zip(xs, got):
            ref, resolution = _mp_central(name, x, order)
            assert abs(g - ref) <= rel * abs(ref) + resolution, (name, order, x, g, ref)


@pytest.mark.parametrize("name", A2TILDE + ["x_softsign", "x_arctan"])
def test_decomposition_identity(name):
    spec = get_activation(name)
    sd = classify(spec).s_decomp
    x = np.linspace(-20.0, 20.0, 4001)
    resid = eval_activation(spec, x) - (x + sd.b0) * sd.h(x) - sd.b1
    assert np.max(np.abs(resid)) <= 1e-12


@pytest.mark.parametrize("name", A3)
def test_a3_asymptotes_at_ten_thousand(name):
    c = classify(get_activation(name))
    lo, hi = eval_activation(c.spec, np.array([-1e4, 1e4]))
    assert abs(lo - c.asymptotes[0]) <= 1e-6 and abs(hi - c.asymptotes[1]) <= 1e-6


@pytest.mark.parametrize("name", ["arctan", "softsign"])
def test_algebraic_tails_reach_asymptotes_further_out(name):
    # arctan and softsign approach their limits like 1/|x|; 1e-6 is reached from |x| ~ 1e6 on
    c = classify(get_activation(name))
    lo, hi = eval_activation(c.spec, np.array([-1e7, 1e7]))
    assert abs(lo - c.asymptotes[0]) <= 1e-6 and abs(hi - c.asymptotes[1]) <= 1e-6


@pytest.mark.parametrize("name", A3)
def test_a3_boundedness(name):
    c = classify(get_activation(name))
    x = np.concatenate([np.linspace(-1e6, 1e6, 200001), np.linspace(-50, 50, 100001)])
    bound = max(abs(c.asymptotes[0]), abs(c.asymptotes[1])) + 1.0
    assert np.max(np.abs(eval_activation(c.spec, x))) <= bound


@pytest.mark.parametrize("name", A3)
def test_a3_curvature_point_nonzero(name):
    c = classify(get_activation(name))
    assert c.curvature_point.rho_pp != 0.0
    assert c.curvature_point.rho_pp == pytest.approx(eval_derivative(c.spec, 2, c.curvature_point.x0))


@settings(max_examples=100)
@given(st.sampled_from(ALL), st.floats(-1e6, 1e6, allow_nan=False))
def test_eval_finite_everywhere(name, x):
    assert math.isfinite(float(eval_activation(get_activation(name), x)))


@given(st.sampled_from(CORE_ACTIVATIONS))
def test_classification_is_deterministic(name):
    a = classify(get_activation(name)).to_json()
    _classify_module._CACHE.clear()
    assert classify(get_activation(name)).to_json() == a
