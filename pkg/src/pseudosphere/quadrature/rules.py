"""Reference quadrature rules on [0, 1] and on the unit triangle."""

import numpy as np

# Gauss-Kronrod 15/7 abscissae and weights on [-1, 1] (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])


def _kronrod_unit():
    x = np.concatenate([-_XGK[:-1], _XGK[::-1]])
    wk = np.concatenate([_WGK[:-1], _WGK[::-1]])
    wg = np.zeros(15)
    # Gauss nodes are xgk[1], xgk[3], xgk[5], xgk[7]
    gauss_idx_right = {1: 0, 3: 1, 5: 2, 7: 3}
    for i, xv in enumerate(x):
        j = int(np.argmin(np.abs(_XGK - abs(xv))))
        if j in gauss_idx_right:
            wg[i] = _WG[gauss_idx_right[j]]
    return (x + 1) / 2, wk / 2, wg / 2


KRONROD_X, KRONROD_W, GAUSS7_W = _kronrod_unit()


def gauss_legendre(m):
    """m-point Gauss-Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(m)
    return (x + 1) / 2, w / 2


GAUSS4_X, GAUSS4_W = gauss_legendre(4)

# interior 3-point rule on the reference triangle (degree 2), barycentric rows
TRI3_BARY = np.array([
    [2 / 3, 1 / 6, 1 / 6],
    [1 / 6, 2 / 3, 1 / 6],
    [1 / 6, 1 / 6, 2 / 3],
])
TRI3_W = np.full(3, 1 / 3)

# 6-point degree-4 rule (Strang-Fix / Dunavant), weights sum to 1
_a, _b = 0.445948490915965, 0.091576213509771
_wa, _wb = 0.223381589678011, 0.109951743655322
TRI6_BARY = np.array([
    [1 - 2 * _a, _a, _a],
    [_a, 1 - 2 * _a, _a],
    [_a, _a, 1 - 2 * _a],
    [1 - 2 * _b, _b, _b],
    [_b, 1 - 2 * _b, _b],
    [_b, _b, 1 - 2 * _b],
])
TRI6_W = np.array([_wa, _wa, _wa, _wb, _wb, _wb])


def segment_rule(name):
    if name in ("gauss4", "auto"):
        return GAUSS4_X, GAUSS4_W
    if name == "centroid3":
        return gauss_legendre(3)
    raise ValueError(f"unknown segment rule {name!r}")


def triangle_rule(name):
    if name in ("centroid3", "auto"):
        return TRI3_BARY, TRI3_W
    if name == "gauss4":
        return TRI6_BARY, TRI6_W
    raise ValueError(f"unknown triangle rule {name!r}")
