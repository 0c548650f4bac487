"""Activation functions, their registry and class membership."""
from reluswap.activations.registry import (
    CORE_ACTIVATIONS, REGISTRY, ActivationSpec, ClassInfo, Kink, SDecomp, get_activation,
    register_activation,
)
from reluswap.activations.classify import (
    Classification, CurvaturePoint, NormalizedDecomposition, SlopePoint, classify, derivative_method,
    eval_activation, eval_derivative, s_shape_normalize,
)

__all__ = [
    "CORE_ACTIVATIONS", "REGISTRY", "ActivationSpec", "ClassInfo", "Kink", "SDecomp", "get_activation",
    "register_activation", "Classification", "CurvaturePoint", "NormalizedDecomposition", "SlopePoint",
    "classify", "derivative_method", "eval_activation", "eval_derivative", "s_shape_normalize",
]
