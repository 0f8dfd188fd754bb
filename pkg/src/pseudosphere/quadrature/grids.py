"""Quadrature node sets over boundaries.

A ``Grid`` carries nodes, outward normals and two weight vectors: the fine
rule used for the value and an embedded coarse rule whose disagreement with
the fine one is the error estimate.  Nodes used by only one of the rules carry
a zero weight in the other.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..constants import sigma
from ..geometry import discrete
from .rules import GAUSS7_W, KRONROD_W, KRONROD_X, gauss_legendre, segment_rule, triangle_rule


@dataclass
class Grid:
    X: np.ndarray
    W: np.ndarray
    Wc: np.ndarray
    N: np.ndarray

    def __len__(self):
        return len(self.W)


def empty_grid(n):
    z = np.zeros(0)
    return Grid(np.zeros((0, n)), z, z, np.zeros((0, n)))


def azimuth_rule(n, M):
    """Directions in the chart's (e1, e2) plane with fine and coarse weights."""
    if n == 2:
        om = np.array([[1.0, 0.0], [-1.0, 0.0]])
        w = np.ones(2)
        return om, w, w.copy()
    if n == 3:
        phi = 2 * np.pi * np.arange(M) / M
        om = np.column_stack([np.cos(phi), np.sin(phi)])
        w = np.full(M, 2 * np.pi / M)
        wc = np.zeros(M)
        wc[::2] = 4 * np.pi / M
        return om, w, wc
    # zonal reduction: integrands depend only on the angle beta to e1
    m = max(M // 2, 4)
    bf, wf = gauss_legendre(m)
    bc, wcc = gauss_legendre(m // 2)
    beta = np.pi * np.concatenate([bf, bc])
    dens = sigma(n - 2) * np.sin(beta) ** (n - 3) * np.pi
    w = np.concatenate([wf, np.zeros(len(bc))]) * dens
    wc = np.concatenate([np.zeros(len(bf)), wcc]) * dens
    om = np.column_stack([np.cos(beta), np.sin(beta)])
    return om, w, wc


def breakpoints(s_end, h0, inner, grading, h_max):
    """Graded panel edges from the pole: width h0 inside ``inner``, then ~grading * s."""
    edges = [0.0]
    s = 0.0
    while s < s_end:
        step = h0 if s < inner else min(h_max, max(h0, grading * s))
        s = min(s + step, s_end)
        edges.append(s)
    return np.array(edges)


def _clip_intervals(dist_minus_R, s_samples, keep_inside):
    """Intervals of [s0, s_end] where the sign condition holds, crossings by brentq."""
    g = dist_minus_R(s_samples)
    roots = []
    for i in np.nonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0]:
        a, b = s_samples[i], s_samples[i + 1]
        if g[i] == 0:
            roots.append(a)
            continue
        if g[i + 1] == 0:
            continue
        roots.append(brentq(lambda s: dist_minus_R(np.array([s]))[0], a, b, xtol=1e-15, rtol=1e-15))
    edges = np.concatenate([[s_samples[0]], roots, [s_samples[-1]]])
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        mid = dist_minus_R(np.array([(a + b) / 2]))[0]
        if (mid < 0) == keep_inside:
            out.append((a, b))
    return out


def _panel_nodes(edges, intervals):
    S, Wf, Wc = [], [], []
    for a, b in intervals:
        e = np.concatenate([[a], edges[(edges > a) & (edges < b)], [b]])
        lo, hi = e[:-1], e[1:]
        ln = (hi - lo)[:, None]
        S.append((lo[:, None] + ln * KRONROD_X).ravel())
        Wf.append((ln * KRONROD_W).ravel())
        Wc.append((ln * GAUSS7_W).ravel())
    if not S:
        return np.zeros(0), np.zeros(0), np.zeros(0)
    return np.concatenate(S), np.concatenate(Wf), np.concatenate(Wc)


def chart_grid(chart, cfg, h_min=None, inner=0.0, region=None, keep_inside=True):
    """Graded tensor grid on a polar chart, optionally clipped to B(z, R) or its complement."""
    n = chart.n
    om, wo, wco = azimuth_rule(n, cfg.azimuth)
    smax = chart.s_max(om)
    s_top = float(np.max(smax))
    h_max = s_top / cfg.panels
    h0 = h_max if h_min is None else min(h_max, h_min / chart.metric)
    edges = breakpoints(s_top, h0, inner / chart.metric, cfg.grading, h_max)

    if region is None and np.all(smax == s_top):
        # no clipping: identical s-panels for every azimuth
        S, Wf, Wc = _panel_nodes(edges, [(0.0, s_top)])
        ns = len(S)
        s_all = np.tile(S, len(om))
        om_all = np.repeat(om, ns, axis=0)
        W = (Wf[None, :] * wo[:, None]).ravel()
        Wcoarse = (Wc[None, :] * wco[:, None]).ravel()
    else:
        s_list, o_list, w_list, wc_list = [], [], [], []
        if region is not None:
            z, R = np.asarray(region[0], dtype=float), float(region[1])
        for k in range(len(om)):
            o = om[k]
            if region is None:
                intervals = [(0.0, smax[k])]
            else:
                def gfun(s, o=o):
                    X, _, _ = chart.point(s, np.repeat(o[None], len(s), axis=0))
                    return np.linalg.norm(X - z, axis=1) - R

                samp = np.union1d(edges[edges < smax[k]], np.linspace(0, smax[k], 257))
                intervals = _clip_intervals(gfun, samp, keep_inside)
            S, Wf, Wc = _panel_nodes(edges, intervals)
            s_list.append(S)
            o_list.append(np.repeat(o[None], len(S), axis=0))
            w_list.append(Wf * wo[k])
            wc_list.append(Wc * wco[k])
        s_all = np.concatenate(s_list)
        om_all = np.concatenate(o_list) if o_list else np.zeros((0, 2))
        W = np.concatenate(w_list)
        Wcoarse = np.concatenate(wc_list)
    if len(s_all) == 0:
        return empty_grid(n)
    X, J, N = chart.point(s_all, om_all)
    keep = (W != 0) | (Wcoarse != 0)
    return Grid(X[keep], (W * J)[keep], (Wcoarse * J)[keep], N[keep])


# ---------------------------------------------------------------------------
# discrete boundaries: element lists


def polyline_elements(b):
    k = b.count
    return np.arange(k), np.zeros(k), np.ones(k)


def _poly_subsize(b, idx, u0, u1):
    X0, _, _ = b.element_points(idx, u0)
    X1, _, _ = b.element_points(idx, u1)
    return X0, X1, np.linalg.norm(X1 - X0, axis=1)


def refine_polyline(b, near, grading, h_min, max_depth=48, elements=None):
    """Split elements until size <= max(grading * distance(element, near), h_min)."""
    idx, u0, u1 = polyline_elements(b) if elements is None else elements
    near = np.asarray(near, dtype=float)
    for _ in range(max_depth):
        X0, X1, size = _poly_subsize(b, idx, u0, u1)
        C, _ = discrete.closest_on_segments(X0, X1, near)
        dist = np.linalg.norm(C - near, axis=1)
        split = size > np.maximum(grading * dist, h_min)
        if not np.any(split):
            break
        um = (u0 + u1) / 2
        idx = np.concatenate([idx[~split], idx[split], idx[split]])
        u0, u1 = (
            np.concatenate([u0[~split], u0[split], um[split]]),
            np.concatenate([u1[~split], um[split], u1[split]]),
        )
    order = np.lexsort((u0, idx))
    return idx[order], u0[order], u1[order]


def _clip_segments(b, elements, z, R, keep_inside):
    idx, u0, u1 = elements
    out_i, out_a, out_b = [], [], []
    if b.curve is None:
        A, B = b.A[idx], b.B[idx]
        d = B - A
        f = A - z
        qa = np.sum(d * d, axis=1)
        qb = 2 * np.sum(f * d, axis=1)
        qc = np.sum(f * f, axis=1) - R * R
        disc = qb * qb - 4 * qa * qc
        sq = np.sqrt(np.maximum(disc, 0))
        r1 = np.where(disc > 0, (-qb - sq) / (2 * qa), np.inf)
        r2 = np.where(disc > 0, (-qb + sq) / (2 * qa), -np.inf)
        if keep_inside:
            a, c = np.maximum(u0, r1), np.minimum(u1, r2)
            ok = c > a
            return idx[ok], a[ok], c[ok]
        a1, c1 = u0, np.minimum(u1, r1)
        a2, c2 = np.maximum(u0, r2), u1
        ok1, ok2 = c1 > a1, c2 > a2
        # elements entirely outside (no real crossing) are kept whole by the first piece
        return (
            np.concatenate([idx[ok1], idx[ok2 & (disc > 0)]]),
            np.concatenate([a1[ok1], a2[ok2 & (disc > 0)]]),
            np.concatenate([c1[ok1], c2[ok2 & (disc > 0)]]),
        )
    # curved arcs: sample each element, locate crossings by brentq
    for i, a, c in zip(idx, u0, u1):
        def g(u, i=i):
            X, _, _ = b.element_points(np.full(len(u), i), u)
            return np.linalg.norm(X - z, axis=1) - R

        for lo, hi in _clip_intervals(g, np.linspace(a, c, 9), keep_inside):
            out_i.append(i)
            out_a.append(lo)
            out_b.append(hi)
    return np.array(out_i, dtype=int), np.array(out_a), np.array(out_b)


def polyline_grid(b, cfg, near=None, h_min=None, region=None, keep_inside=True, elements=None):
    if elements is None:
        elements = polyline_elements(b)
        if near is not None:
            elements = refine_polyline(b, near, cfg.grading, h_min if h_min is not None else 0.0,
                                       cfg.max_depth, elements)
    if region is not None:
        elements = _clip_segments(b, elements, np.asarray(region[0], dtype=float), float(region[1]), keep_inside)
    idx, u0, u1 = elements
    if len(idx) == 0:
        return empty_grid(2)
    gx, gw = segment_rule(cfg.rule)
    q = len(gx)
    ln = (u1 - u0)[:, None]
    # coarse: rule on the element; fine: rule on both halves
    uc = u0[:, None] + ln * gx
    uf = np.concatenate([u0[:, None] + ln / 2 * gx, u0[:, None] + ln / 2 * (1 + gx)], axis=1)
    U = np.concatenate([uf, uc], axis=1)
    Wf = np.concatenate([ln / 2 * gw, ln / 2 * gw, np.zeros((len(idx), q))], axis=1)
    Wc = np.concatenate([np.zeros((len(idx), 2 * q)), ln * gw], axis=1)
    I = np.repeat(idx, 3 * q)
    X, J, N = b.element_points(I, U.ravel())
    return Grid(X, Wf.ravel() * J, Wc.ravel() * J, N)


def _tri_children(T):
    a, b_, c = T[:, 0], T[:, 1], T[:, 2]
    ab, bc, ca = (a + b_) / 2, (b_ + c) / 2, (c + a) / 2
    return np.concatenate([
        np.stack([a, ab, ca], axis=1),
        np.stack([ab, b_, bc], axis=1),
        np.stack([ca, bc, c], axis=1),
        np.stack([ab, bc, ca], axis=1),
    ])


def refine_mesh(T, near, grading, h_min, max_depth=48):
    near = np.asarray(near, dtype=float)
    done = []
    for _ in range(max_depth):
        size = np.max(np.linalg.norm(T - np.roll(T, -1, axis=1), axis=2), axis=1)
        C = discrete.closest_on_triangles(T[:, 0], T[:, 1], T[:, 2], near)
        dist = np.linalg.norm(C - near, axis=1)
        split = size > np.maximum(grading * dist, h_min)
        done.append(T[~split])
        if not np.any(split):
            T = np.zeros((0, 3, 3))
            break
        T = _tri_children(T[split])
    done.append(T)
    return np.concatenate(done)


def clip_mesh(mesh, T, z, R, tol, keep_inside, max_depth=48):
    """Keep triangles inside (or outside) B(z, R); straddlers subdivide to diameter < tol."""
    z = np.asarray(z, dtype=float)
    kept = []
    for _ in range(max_depth):
        if len(T) == 0:
            break
        P = mesh.tri_points(T, np.eye(3))[0]  # projected corners
        dc = np.linalg.norm(P - z, axis=2)
        C = discrete.closest_on_triangles(T[:, 0], T[:, 1], T[:, 2], z)
        dmin = np.linalg.norm(C - z, axis=1)
        size = np.max(np.linalg.norm(T - np.roll(T, -1, axis=1), axis=2), axis=1)
        slack = size**2  # flat-to-curved deviation allowance
        inside = np.all(dc < R, axis=1) & (dmin < R)
        outside = dmin > R + slack
        if keep_inside:
            kept.append(T[inside])
        else:
            kept.append(T[outside])
        straddle = ~(inside | outside)
        small = straddle & (size < tol)
        if np.any(small):
            cen = mesh.tri_points(T[small], np.full((1, 3), 1 / 3))[0][:, 0]
            inn = np.linalg.norm(cen - z, axis=1) < R
            kept.append(T[small][inn == keep_inside])
        T = _tri_children(T[straddle & ~small]) if np.any(straddle & ~small) else np.zeros((0, 3, 3))
    return np.concatenate(kept) if kept else np.zeros((0, 3, 3))


def mesh_grid(mesh, cfg, near=None, h_min=None, region=None, keep_inside=True, triangles=None):
    T = mesh.triangles() if triangles is None else triangles
    if near is not None and triangles is None:
        T = refine_mesh(T, near, cfg.grading, h_min if h_min is not None else 0.0, cfg.max_depth)
    if region is not None:
        R = float(region[1])
        T = clip_mesh(mesh, T, region[0], R, cfg.clip_tol * R, keep_inside, cfg.max_depth)
    if len(T) == 0:
        return empty_grid(3)
    bary, w = triangle_rule(cfg.rule)
    q = len(bary)
    # fine: rule on the 4 midpoint children; coarse: rule on the parent
    kids = np.array([
        [[1, 0, 0], [0.5, 0.5, 0], [0.5, 0, 0.5]],
        [[0.5, 0.5, 0], [0, 1, 0], [0, 0.5, 0.5]],
        [[0.5, 0, 0.5], [0, 0.5, 0.5], [0, 0, 1]],
        [[0.5, 0.5, 0], [0, 0.5, 0.5], [0.5, 0, 0.5]],
    ])
    fine_bary = np.concatenate([bary @ k for k in kids])
    allb = np.concatenate([fine_bary, bary])
    wf = np.concatenate([np.tile(w / 4, 4), np.zeros(q)])
    wc = np.concatenate([np.zeros(4 * q), w])
    X, J, N = mesh.tri_points(T, allb)
    K = len(T)
    return Grid(
        X.reshape(-1, 3),
        (J * wf[None]).ravel(),
        (J * wc[None]).ravel(),
        N.reshape(-1, 3),
    )
