"""Radial functions of star-shaped boundaries and height profiles of graph patches.

Radial functions take unit directions ``U`` of shape (N, n) in the shape's local
frame and return the radius and its tangential (spherical) gradient.  Profiles
take tangent coordinates ``Y`` of shape (N, n-1) and return the height and its
gradient.
"""

import numpy as np

from ..errors import InvalidShape


def _tangential(U, G):
    return G - U * np.sum(U * G, axis=1, keepdims=True)


class ConstantRadius:
    zonal = True

    def __init__(self, radius):
        self.radius = float(radius)

    def value(self, U):
        return np.full(len(U), self.radius)

    def grad(self, U):
        return np.zeros_like(U)

    def describe(self):
        return {"type": "constant", "radius": self.radius}


class EllipsoidRadius:
    zonal = False

    def __init__(self, semi_axes):
        self.axes = np.asarray(semi_axes, dtype=float)

    def value(self, U):
        q = np.sum((U / self.axes) ** 2, axis=1)
        return q**-0.5

    def grad(self, U):
        q = np.sum((U / self.axes) ** 2, axis=1)
        G = -(q**-1.5)[:, None] * U / self.axes**2
        return _tangential(U, G)

    def describe(self):
        return {"type": "ellipsoid", "semi_axes": self.axes.tolist()}


class HarmonicRadius:
    """radius * (1 + amplitude * P(u)) with P a homogeneous harmonic polynomial.

    ``sectoral``: P = Re(exp(-i k phase) (u0 + i u1)^k), i.e. cos(k(theta - phase))
    on the circle.  ``zonal`` (n = 3 only): P = (3 u2^2 - |u|^2) / 2.
    """

    zonal = False

    def __init__(self, radius, amplitude, mode=3, harmonic="sectoral", phase=0.0):
        self.radius = float(radius)
        self.amplitude = float(amplitude)
        self.mode = int(mode)
        self.harmonic = harmonic
        self.phase = float(phase)
        if harmonic not in ("sectoral", "zonal"):
            raise InvalidShape(f"unknown harmonic {harmonic!r}")
        if harmonic == "sectoral" and self.mode < 1:
            raise InvalidShape("sectoral mode must be >= 1")

    def _poly(self, U):
        if self.harmonic == "zonal":
            P = (3 * U[:, 2] ** 2 - np.sum(U**2, axis=1)) / 2
            G = np.zeros_like(U)
            G[:, 0] = -U[:, 0]
            G[:, 1] = -U[:, 1]
            G[:, 2] = 2 * U[:, 2]
            return P, G
        k = self.mode
        rot = np.exp(-1j * k * self.phase)
        w = U[:, 0] + 1j * U[:, 1]
        P = np.real(rot * w**k)
        dw = rot * k * w ** (k - 1)
        G = np.zeros_like(U)
        G[:, 0] = np.real(dw)
        G[:, 1] = -np.imag(dw)
        return P, G

    def value(self, U):
        P, _ = self._poly(U)
        return self.radius * (1 + self.amplitude * P)

    def grad(self, U):
        _, G = self._poly(U)
        return self.radius * self.amplitude * _tangential(U, G)

    def describe(self):
        return {
            "type": "harmonic",
            "radius": self.radius,
            "amplitude": self.amplitude,
            "mode": self.mode,
            "harmonic": self.harmonic,
            "phase": self.phase,
        }


class ScaledRadius:
    def __init__(self, base, factor):
        self.base = base
        self.factor = float(factor)
        self.zonal = base.zonal

    def value(self, U):
        return self.factor * self.base.value(U)

    def grad(self, U):
        return self.factor * self.base.grad(U)

    def describe(self):
        return {"type": "scaled", "factor": self.factor, "base": self.base.describe()}


# graph profiles -------------------------------------------------------------


class Profile:
    radial = True

    def value(self, Y):
        raise NotImplementedError

    def grad(self, Y):
        raise NotImplementedError


class FlatProfile(Profile):
    def value(self, Y):
        return np.zeros(len(Y))

    def grad(self, Y):
        return np.zeros_like(Y)

    def describe(self):
        return {"type": "flat"}


class RadialProfile(Profile):
    """psi(y) = phi(|y|) for a scalar profile phi with phi(0) = phi'(0) = 0."""

    def __init__(self, kind, **params):
        self.kind = kind
        self.params = {k: float(v) for k, v in params.items()}
        if kind == "power" and self.params.get("exponent", 2.0) <= 1:
            raise InvalidShape("power profile needs exponent > 1 to be flat at the origin")
        if kind not in ("paraboloid", "power", "gaussian"):
            raise InvalidShape(f"unknown profile {kind!r}")

    def _phi(self, rho):
        p = self.params
        if self.kind == "paraboloid":
            c = p.get("curvature", 1.0)
            return c * rho**2 / 2, c * rho
        if self.kind == "power":
            a, e = p.get("coef", 1.0), p.get("exponent", 1.5)
            return a * rho**e, a * e * rho ** (e - 1)
        A, w = p.get("amplitude", 1.0), p.get("width", 1.0)
        g = np.exp(-(rho**2) / w**2)
        return A * (1 - g), A * 2 * rho / w**2 * g

    def value(self, Y):
        return self._phi(np.linalg.norm(Y, axis=1))[0]

    def grad(self, Y):
        rho = np.linalg.norm(Y, axis=1)
        _, dphi = self._phi(rho)
        out = np.zeros_like(Y)
        nz = rho > 0
        out[nz] = (dphi[nz] / rho[nz])[:, None] * Y[nz]
        return out

    def describe(self):
        return {"type": self.kind, **self.params}


class QuadraticProfile(Profile):
    """psi(y) = y.H.y / 2."""

    def __init__(self, hessian):
        self.H = np.atleast_2d(np.asarray(hessian, dtype=float))
        off = self.H - np.diag(np.diag(self.H))
        d = np.diag(self.H)
        self.radial = bool(np.allclose(off, 0) and np.allclose(d, d[0]))

    def value(self, Y):
        return 0.5 * np.einsum("ij,jk,ik->i", Y, self.H, Y)

    def grad(self, Y):
        return Y @ self.H.T

    def describe(self):
        return {"type": "quadratic", "hessian": self.H.tolist()}


class ScaledProfile(Profile):
    """Dilation of a profile: psi_s(y) = s * psi(y / s)."""

    def __init__(self, base, factor):
        self.base = base
        self.factor = float(factor)
        self.radial = base.radial

    def value(self, Y):
        return self.factor * self.base.value(Y / self.factor)

    def grad(self, Y):
        return self.base.grad(Y / self.factor)

    def describe(self):
        return {"type": "scaled", "factor": self.factor, "base": self.base.describe()}


def profile_from_dict(d):
    d = dict(d or {"type": "flat"})
    kind = d.pop("type", "flat")
    if kind == "flat":
        return FlatProfile()
    if kind == "quadratic":
        return QuadraticProfile(d["hessian"])
    return RadialProfile(kind, **d)
