"""Published single-neuron gap constants, keyed by registry name.

Each entry gives (m, M_sup) at unit scale and the parameter-dependent scale they are
multiplied by: alpha for ELU/CELU, sigma for GELU (mu = 0 only), 1/beta for Swish.
"""
from __future__ import annotations

import math
from typing import Callable, Mapping

PUBLISHED_GAPS: dict[str, tuple[float, float, Callable[[Mapping[str, float]], float]]] = {
    "elu": (0.0, 1.0, lambda p: p["alpha"]),
    "celu": (0.0, 1.0, lambda p: p["alpha"]),
    "softplus": (0.0, math.log(2.0), lambda p: 1.0),
    "gelu": (0.0, 0.170, lambda p: p["sigma"]),
    "silu": (0.0, 0.278, lambda p: 1.0),
    "swish": (0.0, 0.278, lambda p: 1.0 / p["beta"]),
    "mish": (0.0, 0.309, lambda p: 1.0),
    "x_dsilu": (-0.265, 0.131, lambda p: 1.0),
    "x_softsign_shift": (0.0, 0.5, lambda p: 1.0),
    "x_arctan_shift": (0.0, 1.0 / math.pi, lambda p: 1.0),
}

PUBLISHED_TOLERANCE = 1e-3


def published_constants(name: str, params: Mapping[str, float]) -> tuple[float, float] | None:
    """(m, M_sup) from the table for these parameters, or None when the table has no row."""
    row = PUBLISHED_GAPS.get(name)
    if row is None or (name == "gelu" and params.get("mu", 0.0) != 0.0):
        return None
    m, M, scale = row
    s = scale(params)
    return m * s, M * s
