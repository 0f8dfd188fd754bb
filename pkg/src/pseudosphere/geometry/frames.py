from dataclasses import dataclass

import numpy as np
from scipy.stats import special_ortho_group


def unit(v):
    v = np.asarray(v, dtype=float)
    nv = np.linalg.norm(v)
    if nv == 0:
        raise ValueError("zero vector has no direction")
    return v / nv


def complement_basis(v):
    """Rows form an orthonormal basis of the hyperplane orthogonal to ``v``."""
    v = unit(v)
    n = len(v)
    # Householder reflection mapping e_k to v; its other columns span v-perp
    k = int(np.argmax(np.abs(v)))
    e = np.zeros(n)
    e[k] = 1.0
    w = e - v if v[k] < 0 else e + v
    H = np.eye(n) - 2 * np.outer(w, w) / (w @ w)
    cols = [H[:, j] for j in range(n) if j != k]
    B = np.array(cols)
    # fix orientation so that det([v; B]) > 0 (makes n = 2 frames right-handed)
    if np.linalg.det(np.vstack([v, B])) < 0:
        B[0] = -B[0]
    return B


def rot90(v):
    return np.array([-v[1], v[0]])


@dataclass(frozen=True)
class RigidMotion:
    """x -> scale * rotation @ x + translation (a similarity with det(rotation) = +1)."""

    rotation: np.ndarray
    translation: np.ndarray
    scale: float = 1.0

    @property
    def n(self):
        return len(self.translation)

    def apply(self, X):
        X = np.asarray(X, dtype=float)
        return self.scale * X @ self.rotation.T + self.translation

    def apply_vector(self, V):
        return np.asarray(V, dtype=float) @ self.rotation.T

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n), np.zeros(n), 1.0)

    @classmethod
    def random(cls, n, rng, dilate=True, shift=2.0):
        Q = special_ortho_group.rvs(n, random_state=rng) if n > 1 else np.eye(1)
        b = rng.uniform(-shift, shift, size=n)
        s = float(np.exp(rng.uniform(-1.0, 1.0))) if dilate else 1.0
        return cls(np.asarray(Q), b, s)
