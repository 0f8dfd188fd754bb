"""Dimension-dependent constants of the unit ball and unit sphere."""

import math


def omega(n):
    """Volume of the unit ball in R^n."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def sigma(m):
    """Surface measure of the unit sphere in R^m (so sigma(2) = 2*pi)."""
    return m * omega(m)


def ball_boundary_measure(n, r):
    return sigma(n) * r ** (n - 1)


def ball_volume(n, r):
    return omega(n) * r**n
