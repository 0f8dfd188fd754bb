"""Closed-form reference integrals used to validate the quadrature."""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from ..config import QuadConfig
from ..constants import omega, sigma
from ..geometry.shapes import Ball
from .core import discretize, integrate_boundary


@dataclass(frozen=True)
class OracleCheck:
    n: int
    value: float
    target: float
    error_estimate: float
    evaluations: int
    elements: int

    @property
    def achieved_error(self):
        return abs(self.value - self.target)


def appendix_integrand(n, kind="flux"):
    """x_n / |x|^n ("flux") or 1 / |x|^(n-2) ("potential")."""
    if kind == "flux":
        return lambda X: X[:, -1] / np.linalg.norm(X, axis=1) ** n
    if kind == "potential":
        return lambda X: np.linalg.norm(X, axis=1) ** (2.0 - n)
    raise ValueError(f"unknown integrand {kind!r}")


def reference_appendix_integral(n, resolution=None, representation=None, kind="flux", cfg=None,
                                h_min=1e-7):
    """Integrate over the unit sphere centered at (0, ..., 0, -1), which passes through the origin.

    Targets: -n omega(n) / 2 for the flux integrand and n omega(n) for the potential.
    ``representation`` is "discrete" (curved polyline / projected icosphere mesh,
    n in {2, 3}) or "analytic" (polar chart, any n).
    """
    n = int(n)
    if representation is None:
        representation = "discrete" if n in (2, 3) else "analytic"
    cfg = cfg or QuadConfig()
    center = np.zeros(n)
    center[-1] = -1.0
    ball = Ball(center, 1.0)
    origin = np.zeros(n)
    f = appendix_integrand(n, kind)
    target = -n * omega(n) / 2 if kind == "flux" else n * omega(n)
    if representation == "discrete":
        if resolution is None:
            resolution = 10_000 if n == 2 else 100_000
        b = discretize(ball, resolution)
        res = integrate_boundary(b, f, cfg=cfg, near=origin, h_min=h_min)
        elements = b.count
    else:
        res = integrate_boundary(ball, f, cfg=cfg, near=origin, h_min=h_min, inner=h_min * 32)
        elements = 0
    return OracleCheck(n, res.value, target, res.error_estimate, res.evaluations, elements)


def poisson_normalization(n):
    """(2 / (n omega_n)) sigma_{n-1} int_0^inf s^(n-2) (1 + s^2)^(-n/2) ds, which equals 1."""
    integral, err = quad(lambda s: s ** (n - 2) * (1 + s * s) ** (-n / 2), 0, np.inf,
                         epsabs=1e-14, epsrel=1e-13, limit=200)
    pref = 2 / (n * omega(n)) * sigma(n - 1)
    return pref * integral, pref * err
