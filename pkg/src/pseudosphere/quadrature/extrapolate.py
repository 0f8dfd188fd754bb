"""Limits of sampled one-parameter families value(t) as t -> 0."""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from ..errors import InsufficientSamples

POWER, GEOMETRIC = "PowerLaw", "Geometric"


@dataclass
class LimitEstimate:
    value: float
    samples: list
    order_estimate: float
    residual: float = 0.0
    flags: list = field(default_factory=list)
    model: str = POWER

    @property
    def converged(self):
        return "no_convergence" not in self.flags


def _aitken(t, v):
    d1, d2 = v[-2] - v[-3], v[-1] - v[-2]
    if d1 == 0:
        return v[-1], np.nan, False
    ratio = d2 / d1
    if not 0 < ratio < 1:
        return v[-1], np.nan, False
    p = np.log(ratio) / np.log(t[-1] / t[-2])
    return v[-1] + d2 * ratio / (1 - ratio), p, True


def _power_fit(t, v):
    L0, p0, ok = _aitken(t, v)
    if not ok:
        return L0, p0, False
    p0 = float(np.clip(p0, 0.1, 7.5))
    scale = t[0]
    tt = t / scale
    C0 = (v[0] - L0) / tt[0] ** p0 if tt[0] > 0 else 0.0
    vs = max(np.max(np.abs(v - v[-1])), 1e-300)

    def res(x):
        L, C, p = x
        return (L + C * tt**p - v) / vs

    sol = least_squares(res, [L0, C0, p0], bounds=([-np.inf, -np.inf, 0.05], [np.inf, np.inf, 8.0]),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
    L, _, p = sol.x
    return float(L), float(p), True


def _extrapolant(t, v, model):
    if model == GEOMETRIC:
        return _aitken(t, v)
    return _power_fit(t, v)


def extrapolate_limit(samples, model=POWER, tail=4, noise=0.0, oscillation_tol=1e-2):
    """Extrapolate value(t) ~ L + C t^p from the last ``tail`` samples.

    Tails that are not monotone fall back to their minimum (a liminf surrogate)
    and are flagged; differences below ``noise`` count as zero.
    """
    if model not in (POWER, GEOMETRIC):
        raise ValueError(f"unknown model {model!r}")
    samples = [(float(a), float(b)) for a, b in samples]
    if len(samples) < 4:
        raise InsufficientSamples(f"need at least 4 samples, got {len(samples)}")
    t = np.array([s[0] for s in samples])
    v = np.array([s[1] for s in samples])
    if np.any(t <= 0) or np.any(np.diff(t) >= 0):
        raise InsufficientSamples("parameters must be positive and strictly decreasing")
    k = max(4, min(tail, len(t)))
    tt, vv = t[-k:], v[-k:]
    floor = noise + 1e-13 * (1 + np.max(np.abs(vv)))
    d = np.diff(vv)
    flags = []
    if np.all(np.abs(d) <= floor):
        return LimitEstimate(float(vv[-1]), samples, float("nan"), float(np.ptp(vv)),
                             ["order_indeterminate"], model)
    sig = np.sign(d[np.abs(d) > floor])
    if not (np.all(sig > 0) or np.all(sig < 0)):
        flags.append("not_monotone")
        spread = float(np.ptp(vv))
        if spread > oscillation_tol * (1 + abs(vv.min())):
            flags.append("no_convergence")
        return LimitEstimate(float(vv.min()), samples, float("nan"), spread, flags, model)
    L, p, ok = _extrapolant(tt, vv, model)
    if not ok:
        flags.append("no_convergence")
        return LimitEstimate(float(vv[-1]), samples, float("nan"), float(abs(d[-1])), flags, model)
    if len(t) > k:
        L2, _, ok2 = _extrapolant(t[-k - 1:-1], v[-k - 1:-1], model)
        residual = abs(L - L2) if ok2 else abs(L - vv[-1])
    else:
        residual = abs(L - vv[-1])
    return LimitEstimate(float(L), samples, float(p), float(residual), flags, model)
