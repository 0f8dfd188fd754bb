"""Vectorized primitives for polylines and triangle meshes."""

import numpy as np

from ..errors import InvalidShape


def closest_on_segments(A, B, p):
    """Closest points on segments [A_i, B_i] to p; returns (points, local param)."""
    d = B - A
    L2 = np.sum(d * d, axis=1)
    u = np.where(L2 > 0, np.sum((p - A) * d, axis=1) / np.where(L2 > 0, L2, 1), 0.0)
    u = np.clip(u, 0.0, 1.0)
    return A + u[:, None] * d, u


def closest_on_triangles(A, B, C, p):
    """Closest points on triangles (A_i, B_i, C_i) to p (Ericson's region test, vectorized)."""
    K = len(A)
    out = np.empty((K, 3))
    done = np.zeros(K, dtype=bool)
    ab, ac, ap = B - A, C - A, p - A
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)

    def take(mask, pts):
        m = mask & ~done
        out[m] = pts[m] if pts.ndim == 2 else pts
        done[m] = True

    take((d1 <= 0) & (d2 <= 0), A)
    bp = p - B
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    take((d3 >= 0) & (d4 <= d3), B)
    vc = d1 * d4 - d3 * d2
    with np.errstate(divide="ignore", invalid="ignore"):
        v = d1 / (d1 - d3)
        take((vc <= 0) & (d1 >= 0) & (d3 <= 0), A + v[:, None] * ab)
        cp = p - C
        d5 = np.einsum("ij,ij->i", ab, cp)
        d6 = np.einsum("ij,ij->i", ac, cp)
        take((d6 >= 0) & (d5 <= d6), C)
        vb = d5 * d2 - d1 * d6
        w = d2 / (d2 - d6)
        take((vb <= 0) & (d2 >= 0) & (d6 <= 0), A + w[:, None] * ac)
        va = d3 * d6 - d5 * d4
        w2 = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        take((va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0), B + w2[:, None] * (C - B))
        denom = 1.0 / (va + vb + vc)
        vv = vb * denom
        ww = vc * denom
        take(np.ones(K, dtype=bool), A + ab * vv[:, None] + ac * ww[:, None])
    return out


def winding_number(V, p):
    """Winding number of the closed polygon V (N, 2) around p (crossing form)."""
    A = V - p
    B = np.roll(A, -1, axis=0)
    up = (A[:, 1] <= 0) & (B[:, 1] > 0)
    down = (A[:, 1] > 0) & (B[:, 1] <= 0)
    cross = A[:, 0] * B[:, 1] - A[:, 1] * B[:, 0]
    return int(np.sum(up & (cross > 0)) - np.sum(down & (cross < 0)))


# fixed irrational-ish directions; a ray is rejected if it grazes an edge
_RAY_DIRS = np.array([
    [0.5773502691896258, 0.5773502691896258, 0.5773502691896258],
    [0.2672612419124244, -0.5345224838248488, 0.8017837257372732],
    [-0.7071067811865476, 0.1414213562373095, 0.6928203230275509],
    [0.1230914909793327, 0.9847319278346618, -0.1230914909793327],
    [-0.4082482904638631, -0.8164965809277261, -0.4082482904638631],
])


def ray_parity_inside(V, F, p, eps=1e-10):
    """Inside test for a closed triangle mesh by ray-crossing parity.

    Rays that pass within ``eps`` (barycentric) of an edge or vertex, or run
    parallel to a face, are discarded; the remaining rays vote.
    """
    A, B, C = V[F[:, 0]], V[F[:, 1]], V[F[:, 2]]
    e1, e2 = B - A, C - A
    votes = []
    for d in _RAY_DIRS:
        h = np.cross(d, e2)
        a = np.einsum("ij,ij->i", e1, h)
        scale = np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1)
        parallel = np.abs(a) < 1e-14 * scale
        f = np.where(parallel, 0.0, 1.0 / np.where(parallel, 1.0, a))
        s = p - A
        u = f * np.einsum("ij,ij->i", s, h)
        q = np.cross(s, e1)
        v = f * (q @ d)
        t = f * np.einsum("ij,ij->i", e2, q)
        w = 1 - u - v
        candidate = ~parallel & (t > 0)
        near_edge = candidate & (u > -eps) & (v > -eps) & (w > -eps) & (
            (np.abs(u) <= eps) | (np.abs(v) <= eps) | (np.abs(w) <= eps)
        )
        if np.any(near_edge):
            continue
        hits = candidate & (u > 0) & (v > 0) & (w > 0)
        votes.append(int(np.sum(hits)) % 2 == 1)
        if len(votes) == 3:
            break
    if not votes:
        raise InvalidShape("all test rays grazed mesh edges; point too close to the surface")
    return sum(votes) * 2 > len(votes)


def validate_mesh(V, F):
    """Check watertightness and consistent orientation; returns signed volume."""
    if F.ndim != 2 or F.shape[1] != 3:
        raise InvalidShape("faces must be an (M, 3) index array")
    if F.min() < 0 or F.max() >= len(V):
        raise InvalidShape("face index out of range")
    if not np.all(np.isfinite(V)):
        raise InvalidShape("non-finite vertex coordinates")
    A, B, C = V[F[:, 0]], V[F[:, 1]], V[F[:, 2]]
    area2 = np.linalg.norm(np.cross(B - A, C - A), axis=1)
    if np.any(area2 <= 0):
        raise InvalidShape("degenerate triangle")
    directed = np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]])
    nv = len(V)
    key = directed[:, 0].astype(np.int64) * nv + directed[:, 1]
    rkey = directed[:, 1].astype(np.int64) * nv + directed[:, 0]
    ukey, counts = np.unique(key, return_counts=True)
    if np.any(counts > 1):
        raise InvalidShape("mesh is not consistently oriented (repeated directed edge)")
    if not np.all(np.isin(rkey, ukey)):
        raise InvalidShape("mesh is not watertight (unmatched edge)")
    return float(np.sum(np.einsum("ij,ij->i", A, np.cross(B, C))) / 6.0)


def icosphere(frequency):
    """Geodesic unit sphere: each icosahedron face split into frequency^2 triangles."""
    m = int(frequency)
    if m < 1:
        raise InvalidShape("icosphere frequency must be >= 1")
    t = (1 + 5**0.5) / 2
    ico = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=float)
    ico /= np.linalg.norm(ico, axis=1, keepdims=True)
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    # barycentric lattice on one face
    ij = [(i, j) for i in range(m + 1) for j in range(m + 1 - i)]
    index = {p: k for k, p in enumerate(ij)}
    local_tris = []
    for i in range(m):
        for j in range(m - i):
            local_tris.append((index[(i, j)], index[(i + 1, j)], index[(i, j + 1)]))
            if j < m - i - 1:
                local_tris.append((index[(i + 1, j)], index[(i + 1, j + 1)], index[(i, j + 1)]))
    local_tris = np.array(local_tris)
    lat = np.array(ij, dtype=float) / m
    pts, tris = [], []
    for f_i, (a, b, c) in enumerate(faces):
        P = (1 - lat[:, 0:1] - lat[:, 1:2]) * ico[a] + lat[:, 0:1] * ico[b] + lat[:, 1:2] * ico[c]
        pts.append(P / np.linalg.norm(P, axis=1, keepdims=True))
        tris.append(local_tris + f_i * len(lat))
    P = np.concatenate(pts)
    T = np.concatenate(tris)
    _, first, inverse = np.unique(np.round(P, 10), axis=0, return_index=True, return_inverse=True)
    V = P[first]
    F = inverse.reshape(-1)[T]
    # orient outward
    A, B, C = V[F[:, 0]], V[F[:, 1]], V[F[:, 2]]
    flip = np.einsum("ij,ij->i", np.cross(B - A, C - A), A + B + C) < 0
    F[flip] = F[flip][:, ::-1]
    return V, F


def read_off(path):
    with open(path) as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise InvalidShape(f"{path}: not an ASCII OFF file")
    try:
        nv, nf = int(tokens[1]), int(tokens[2])
        pos = 4
        V = np.array(tokens[pos: pos + 3 * nv], dtype=float).reshape(nv, 3)
        pos += 3 * nv
        F = []
        for _ in range(nf):
            k = int(tokens[pos])
            idx = [int(x) for x in tokens[pos + 1: pos + 1 + k]]
            pos += 1 + k
            if k < 3:
                raise InvalidShape(f"{path}: face with {k} vertices")
            for i in range(1, k - 1):  # fan-triangulate polygons
                F.append((idx[0], idx[i], idx[i + 1]))
    except (ValueError, IndexError) as exc:
        raise InvalidShape(f"{path}: malformed OFF data ({exc})") from None
    return V, np.array(F, dtype=np.int64)


def write_off(path, V, F):
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{len(V)} {len(F)} 0\n")
        for v in V:
            fh.write(" ".join(repr(float(x)) for x in v) + "\n")
        for f in F:
            fh.write("3 " + " ".join(str(int(i)) for i in f) + "\n")


def read_polyline_csv(path):
    with open(path) as fh:
        first = fh.readline()
    try:
        [float(v) for v in first.split(",")]
        skip = 0
    except ValueError:
        skip = 1  # header row
    try:
        pts = np.loadtxt(path, delimiter=",", ndmin=2, skiprows=skip)
    except ValueError as exc:
        raise InvalidShape(f"{path}: {exc}") from None
    if pts.shape[1] != 2:
        raise InvalidShape(f"{path}: expected x,y rows")
    return pts
