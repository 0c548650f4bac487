"""Alternating binomial moment sums, in exact integer arithmetic."""
from __future__ import annotations

from math import comb

from reluswap.errors import BinomialOverflow, ParameterDomainError

MAX_N = 20


def binom_alternating_sum(n: int, i: int) -> int:
    """sum_{l=0}^{n} (-1)^l C(n, l) l^i.

    Zero for i < n and (-1)^n n! for i = n. Limited to n <= 20 so every partial sum
    fits a signed 64-bit integer.
    """
    if n < 0 or i < 0:
        raise ParameterDomainError(f"n and i must be non-negative, got n={n}, i={i}")
    if i > n:
        raise ParameterDomainError(f"i must not exceed n, got n={n}, i={i}")
    if n > MAX_N:
        raise BinomialOverflow(f"n={n} exceeds {MAX_N}; the terms no longer fit in 64 bits")
    # 0**0 == 1 in Python, which is the convention the identity needs
    return sum((-1) ** l * comb(n, l) * l ** i for l in range(n + 1))


def derivative_coefficients(k: int) -> list[int]:
    """(-1)^l C(k, l) for l = 0..k."""
    if k > MAX_N:
        raise BinomialOverflow(f"order {k} exceeds {MAX_N}")
    return [(-1) ** l * comb(k, l) for l in range(k + 1)]
