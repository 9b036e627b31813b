"""Quadrature layout for the two-propagator oscillatory integral.

At fixed Schwinger parameters (a1, a2) the loop momentum is split as
p = x K/|K| + p_perp with r = |p_perp|.  The Gaussian factor is centred
at x = c with width w = 1/sqrt(a1 + a2); the 1/p^2 terms cut holes of
radius sqrt(a_i a) around p = 0 and p = K.

The r integral of r sin(q r) F(r) is the imaginary part of the integral of
r exp(i q r) F(r), taken along a contour in the upper half plane: a ray
at angle pi/6 up to height y0 = q/(2s), then the horizontal line at that
height, where the Gaussian and the plane wave combine into a real Gaussian
(no oscillation).  The contour stays inside |arg r| < pi/4, where the
1/p^2 factors remain bounded.

Functions are jitable: plain Python for the numpy backend, inlined into
the compiled kernels otherwise.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import jitable

X_MULT = np.array([-9.0, -6.0, -4.0, -2.5, -1.5, -0.75, 0.0, 0.75, 1.5, 2.5, 4.0, 6.0, 9.0])
HOLE_MULT = np.array([-4.0, -1.5, -0.5, 0.0, 0.5, 1.5, 4.0])
HOLE_POS = np.array([0.1, 0.25, 0.5, 1.0, 1.5, 2.5, 4.0])
T_MULT = np.array([0.5, 1.5, 3.0, 5.0])
Q_MULT = np.array([1.0, 3.0, 9.0, 27.0])
RAY_ANGLE = math.pi / 6.0
HOLE_THRESHOLD = 1e-4
LOG_FLOOR = 60.0


@jitable
def panelize(cand, lo, hi, maxw):
    """Sorted panel edges on [lo, hi] through the candidates inside it, max width ``maxw``."""
    pts = np.empty(cand.size + 2)
    pts[0] = lo
    m = 1
    for i in range(cand.size):
        v = cand[i]
        if v > lo and v < hi:
            pts[m] = v
            m += 1
    pts[m] = hi
    m += 1
    pts = np.sort(pts[:m])
    tiny = 1e-13 * (abs(lo) + abs(hi))
    total = 0
    for i in range(m - 1):
        gap = pts[i + 1] - pts[i]
        if gap > tiny:
            total += max(1, int(math.ceil(gap / maxw)))
    edges = np.empty(total + 1)
    edges[0] = pts[0]
    k = 0
    for i in range(m - 1):
        gap = pts[i + 1] - pts[i]
        if gap > tiny:
            nsub = max(1, int(math.ceil(gap / maxw)))
            start = edges[k]
            span = pts[i + 1] - start
            for j in range(1, nsub + 1):
                k += 1
                edges[k] = start + span * j / nsub
    return edges


@jitable
def composite_nodes(edges, gx, gw):
    n = gx.size
    m = edges.size - 1
    nodes = np.empty(m * n)
    weights = np.empty(m * n)
    for i in range(m):
        half = 0.5 * (edges[i + 1] - edges[i])
        mid = 0.5 * (edges[i + 1] + edges[i])
        for j in range(n):
            nodes[i * n + j] = mid + half * gx[j]
            weights[i * n + j] = half * gw[j]
    return nodes, weights


@jitable
def _breaks(lo, w, wmult, h1, h2, holes, q, qmult):
    n = wmult.size
    if holes:
        n += 2 * HOLE_POS.size
    if q > 0.0:
        n += qmult.size
    out = np.empty(n)
    k = 0
    for v in wmult:
        out[k] = lo + w * v
        k += 1
    if holes:
        for v in HOLE_POS:
            out[k] = h1 * v
            out[k + 1] = h2 * v
            k += 2
    if q > 0.0:
        for v in qmult:
            out[k] = v / q
            k += 1
    return out


@jitable
def x_edges(s, c, K, q, h1, h2, holes):
    w = 1.0 / math.sqrt(s)
    nx = X_MULT.size
    if holes:
        nx += 2 * HOLE_MULT.size
        if q > 0.0:
            nx += 4 * Q_MULT.size
    xc = np.empty(nx)
    k = 0
    for v in X_MULT:
        xc[k] = c + w * v
        k += 1
    if holes:
        for v in HOLE_MULT:
            xc[k] = h1 * v
            xc[k + 1] = K + h2 * v
            k += 2
        if q > 0.0:
            for v in Q_MULT:
                xc[k] = v / q
                xc[k + 1] = -v / q
                xc[k + 2] = K + v / q
                xc[k + 3] = K - v / q
                k += 4
    return panelize(xc, c - 9.0 * w, c + 9.0 * w, 1.5 * w)


@jitable
def contour_nodes(s, q, h1, h2, holes, gx, gw):
    """Nodes r_j and weights W_j with sum_j W_j G(r_j) ~ the r integral.

    For q > 0 the weights include r exp(i q r - s r^2) dr, and the r
    integral of r^2 sinc(q r) exp(-s r^2) G(r) is Im(sum)/q.  For q = 0 they
    include r^2 exp(-s r^2) dr and the integral is the real part.
    """
    w = 1.0 / math.sqrt(s)
    if q <= 0.0:
        top = math.sqrt(LOG_FLOOR / s)
        edges = panelize(_breaks(0.0, w, T_MULT, h1, h2, holes, 0.0, Q_MULT), 0.0, top, 1.5 * w)
        t, wt = composite_nodes(edges, gx, gw)
        r = t + 0j
        W = wt * t * t * np.exp(-s * t * t) + 0j
        return r, W
    y0 = 0.5 * q / s
    ephi = complex(math.cos(RAY_ANGLE), math.sin(RAY_ANGLE))
    # ray: |integrand| ~ exp(-(s t^2 + q t)/2)
    t_cut = (-q + math.sqrt(q * q + 8.0 * LOG_FLOOR * s)) / (2.0 * s)
    t_end = min(2.0 * y0, t_cut)
    e_ray = panelize(_breaks(0.0, w, T_MULT, h1, h2, holes, q, Q_MULT), 0.0, t_end,
                     min(3.0 / q, 1.5 * w))
    t, wt = composite_nodes(e_ray, gx, gw)
    r_ray = t * ephi
    W_ray = wt * ephi * r_ray * np.exp(1j * q * r_ray - s * r_ray * r_ray)
    rest = LOG_FLOOR - 0.25 * q * q / s
    u0 = math.sqrt(3.0) * y0
    if t_end < 2.0 * y0 or rest <= s * u0 * u0:
        return r_ray, W_ray
    u1 = math.sqrt(rest / s)
    e_line = panelize(_breaks(u0, w, T_MULT, h1, h2, holes, 0.0, Q_MULT), u0, u1, 1.5 * w)
    u, wu = composite_nodes(e_line, gx, gw)
    r_line = u + 1j * y0
    W_line = wu * r_line * np.exp(1j * q * r_line - s * r_line * r_line)
    return np.concatenate((r_ray, r_line)), np.concatenate((W_ray, W_line))


@jitable
def pair_setup(al1, al2, K, q, a_eff, gx, gw):
    """Everything the pair integral needs: (s, c, base-free x nodes/weights, contour)."""
    s = al1 + al2
    c = al2 * K / s
    h1 = math.sqrt(al1 * a_eff)
    h2 = math.sqrt(al2 * a_eff)
    holes = a_eff > 0.0 and max(h1, h2) * math.sqrt(s) > HOLE_THRESHOLD
    x, wx = composite_nodes(x_edges(s, c, K, q, h1, h2, holes), gx, gw)
    r, W = contour_nodes(s, q, h1, h2, holes, gx, gw)
    return s, c, x, wx, r, W
