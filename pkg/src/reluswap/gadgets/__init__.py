"""Scalar sub-networks that emulate ReLU, derivatives, the identity and products."""
from reluswap.gadgets.base import GRID_POINTS, Gadget, calibrate
from reluswap.gadgets.basic import derivative_gadget, eta_floor, identity_gadget, product_gadget
from reluswap.gadgets.binom import binom_alternating_sum
from reluswap.gadgets.constants import GapConstants, estimate_gap_constants, gap_function
from reluswap.gadgets.relu import PRIORITY, available_paths, expected_shape, relu_gadget

__all__ = [
    "GRID_POINTS", "Gadget", "calibrate", "derivative_gadget", "eta_floor", "identity_gadget", "product_gadget",
    "binom_alternating_sum", "GapConstants", "estimate_gap_constants", "gap_function", "PRIORITY",
    "available_paths", "expected_shape", "relu_gadget",
]
