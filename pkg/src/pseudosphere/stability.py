"""Both sides of the gap/index stability inequality and the pseudosphere classifier."""

from dataclasses import dataclass, field

import numpy as np

ROUNDOFF = 64 * np.finfo(float).eps

from .config import FlatnessConfig, QuadConfig, SearchConfig
from .constants import ball_boundary_measure, ball_volume, omega
from .flatness import touching_indices
from .kuran import kuran_gap

HOLDS, VIOLATED, INCONCLUSIVE, NOT_APPLICABLE = "Holds", "Violated", "Inconclusive", "NotApplicable"
IS_SPHERE = "IsSphere"
NOT_PSEUDOSPHERE = "NotAPseudosphere"
CONSISTENT = "ConsistentWithPseudosphere"


@dataclass(frozen=True)
class Verdict:
    status: str
    margin: float
    budget: float

    def to_dict(self):
        return {"status": self.status, "margin": self.margin, "budget": self.budget}


def judge(lhs, rhs, budget, flagged=False):
    margin = lhs - rhs
    if flagged:
        return Verdict(INCONCLUSIVE, margin, budget)
    if margin >= -budget:
        return Verdict(HOLDS, margin, budget)
    return Verdict(VIOLATED, margin, budget)


@dataclass
class PipelineConfig:
    quad: QuadConfig = field(default_factory=QuadConfig)
    gap_quad: QuadConfig = field(default_factory=lambda: QuadConfig(panels=16, azimuth=32))
    search: SearchConfig = field(default_factory=SearchConfig)
    flatness: FlatnessConfig = field(default_factory=FlatnessConfig)
    index_tol: float = 1e-2


@dataclass
class Measures:
    n: int
    perimeter: float
    perimeter_err: float
    r: float
    r_err: float
    ball_measure: float
    volume: float = float("nan")
    volume_err: float = 0.0
    ball_volume: float = float("nan")

    @property
    def excess_volume(self):
        return self.volume - self.ball_volume


def measures(b, r, r_err=0.0):
    P, Perr = b.measure_result
    m = Measures(b.n, P, Perr, r, r_err, ball_boundary_measure(b.n, r))
    if b.closed:
        m.volume, m.volume_err = b.volume_result
        m.ball_volume = ball_volume(b.n, r)
    return m


def stability_rhs(b, x0, z, S_z):
    """(|boundary| - S_z |dB|) / |boundary| with B the ball about x0 through z."""
    r = float(np.linalg.norm(np.asarray(z, dtype=float) - np.asarray(x0, dtype=float)))
    P = b.measure
    return (P - S_z * ball_boundary_measure(b.n, r)) / P


def _rhs_budget(m, S, S_err):
    """Error of (P - S |dB|)/P from the index, measure and touching-radius errors."""
    dB = m.ball_measure
    d_r = (m.n - 1) * dB / m.r * m.r_err if m.r > 0 else 0.0
    err = (dB * S_err + S * d_r) / m.perimeter + S * dB * m.perimeter_err / m.perimeter**2
    return err + ROUNDOFF * (1 + S * dB / m.perimeter)


def iso_terms(m):
    """(|boundary| - |dB|, (n-1) omega^(1/n) |Omega \\ B| / |Omega|^(1/n)) and an error budget."""
    n = m.n
    lhs = m.perimeter - m.ball_measure
    c = (n - 1) * omega(n) ** (1 / n)
    rhs = c * m.excess_volume / m.volume ** (1 / n)
    dB_r = (n - 1) * m.ball_measure / m.r * m.r_err if m.r > 0 else 0.0
    dV_r = n * m.ball_volume / m.r * m.r_err if m.r > 0 else 0.0
    err = m.perimeter_err + dB_r + c * (m.volume_err + dV_r) / m.volume ** (1 / n)
    err += c * abs(m.excess_volume) * m.volume_err / (n * m.volume ** (1 / n + 1))
    err += ROUNDOFF * (m.perimeter + m.ball_measure + c * (m.volume + m.ball_volume) / m.volume ** (1 / n))
    return lhs, rhs, err


def isoperimetric_chain(b, x0, r=None):
    """Returns (|boundary| - |dB|, (n-1) omega^(1/n) |Omega \\ B| / |Omega|^(1/n))."""
    from .geometry.ops import touching_set

    if not b.closed:
        from .errors import PatchHasNoVolume

        raise PatchHasNoVolume(f"{b.kind} does not enclose a volume")
    if r is None:
        r = touching_set(b, x0).radius
    lhs, rhs, _ = iso_terms(measures(b, r))
    return lhs, rhs


@dataclass
class StabilityReport:
    gap: object
    index_per_z: list  # [(z, IndexEstimate)]
    measures: Measures
    rhs_theorem: list
    budgets: list
    theorem: list  # Verdict per z
    rhs_cor2: float
    iso_rhs: float
    cor2: Verdict
    iso: Verdict
    chain: Verdict
    touching_count: int
    classification: str = ""
    witness: object = None
    notes: list = field(default_factory=list)

    @property
    def violated(self):
        return any(v.status == VIOLATED for v in self.theorem + [self.cor2, self.iso, self.chain])


def check_theorem(b, x0, cfg=None, touching=None, workers=1):
    """Gap, indices at the touching points, the inequality sides and their verdicts."""
    cfg = cfg or PipelineConfig()
    x0 = np.asarray(x0, dtype=float)
    if touching is None:
        touching = touching_indices(b, x0, cfg.flatness, workers=workers)
    ts, indices = touching
    r = ts.radius
    # discrete boundaries know r to within the touching tolerance
    r_err = 0.0 if b.analytic else ts.tolerance
    m = measures(b, r, r_err)
    gap = kuran_gap(b, x0, cfg.search, cfg.gap_quad, r=r)
    K, K_err = gap.value, gap.error_estimate
    rhs, budgets, verdicts = [], [], []
    for est in indices:
        rt = (m.perimeter - est.value * m.ball_measure) / m.perimeter
        eps = K_err + _rhs_budget(m, est.value, est.error_estimate)
        rhs.append(rt)
        budgets.append(eps)
        verdicts.append(judge(K, rt, eps, flagged=not est.converged))

    rhs_cor2 = (m.perimeter - m.ball_measure) / m.perimeter
    eps_cor2 = K_err + _rhs_budget(m, 1.0, 0.0)
    applicable = any(e.value - e.error_estimate <= 1.0 + cfg.index_tol for e in indices)
    notes = []
    if b.closed:
        lhs_iso, rhs_iso_raw, iso_err = iso_terms(m)
        iso_rhs = rhs_iso_raw / m.perimeter
        chain = judge(lhs_iso, rhs_iso_raw, iso_err)
        eps_iso = K_err + iso_err / m.perimeter
    else:
        iso_rhs, eps_iso = float("nan"), 0.0
        chain = Verdict(NOT_APPLICABLE, float("nan"), 0.0)
    if applicable:
        cor2 = judge(K, rhs_cor2, eps_cor2)
        iso = judge(K, iso_rhs, eps_iso) if b.closed else Verdict(NOT_APPLICABLE, float("nan"), 0.0)
    else:
        notes.append("every sampled index exceeds 1; the index-free bounds do not apply")
        cor2 = Verdict(NOT_APPLICABLE, K - rhs_cor2, eps_cor2)
        iso = Verdict(NOT_APPLICABLE, K - iso_rhs, eps_iso)
    report = StabilityReport(
        gap, [(e.z, e) for e in indices], m, rhs, budgets, verdicts, rhs_cor2, iso_rhs, cor2, iso,
        chain, len(ts), notes=notes,
    )
    report.classification, report.witness = _classify(report, cfg)
    return report


def _classify(rep, cfg):
    K, eps = rep.gap.value, max(rep.gap.error_estimate, 1e-12)
    gap_zero = K <= 3 * eps
    indices = [e for _, e in rep.index_per_z]
    if not gap_zero:
        return NOT_PSEUDOSPHERE, {"reason": "gap", "gap": K, "threshold": 3 * eps}
    for e in indices:
        tol = max(cfg.index_tol, 3 * e.error_estimate)
        if e.converged and e.value < 1 - tol:
            return NOT_PSEUDOSPHERE, {"reason": "index", "z": e.z, "index": e.value}
    m = rep.measures
    vol_tol = 3 * (m.volume_err + (m.n * m.ball_volume / m.r * m.r_err if m.r else 0.0))
    vol_tol = max(vol_tol, ROUNDOFF * abs(m.volume))
    small_index = any(e.value - e.error_estimate <= 1 + cfg.index_tol for e in indices)
    if small_index and abs(m.excess_volume) <= vol_tol:
        return IS_SPHERE, {"gap": K, "excess_volume": m.excess_volume}
    return CONSISTENT, {"gap": K}


def classify(b, x0, cfg=None, workers=1):
    rep = check_theorem(b, x0, cfg, workers=workers)
    return rep.classification, rep
