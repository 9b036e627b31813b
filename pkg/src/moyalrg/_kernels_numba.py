"""numba-compiled kernels; same contracts as ``_kernels_numpy``."""
from __future__ import annotations

import ctypes
import math

import numpy as np
from numba import njit
from numba.extending import get_cython_function_address

from ._geometry import pair_setup


@njit(cache=True)
def pair_integral(al1, al2, K, q, a_eff, mu2, gx, gw):
    s, c, x, wx, r, W = pair_setup(al1, al2, K, q, a_eff, gx, gw)
    base = al1 * al2 * K * K / s + s * mu2
    nr = r.size
    total = 0.0 + 0.0j
    if a_eff > 0.0:
        r2 = r * r
        for i in range(x.size):
            xi = x[i]
            xa = xi * xi
            xb = (xi - K) * (xi - K)
            acc = 0.0 + 0.0j
            for j in range(nr):
                acc += W[j] * np.exp(-al1 * a_eff / (xa + r2[j]) - al2 * a_eff / (xb + r2[j]))
            total += wx[i] * math.exp(-s * (xi - c) * (xi - c) - base) * acc
    else:
        sx = 0.0
        for i in range(x.size):
            sx += wx[i] * math.exp(-s * (x[i] - c) * (x[i] - c) - base)
        total = sx * np.sum(W)
    if q > 0.0:
        return 4.0 * math.pi / q * total.imag
    return 4.0 * math.pi * total.real


@njit(cache=True)
def fourpoint_sum(al, wa, K, q, a_eff, mu2, gx, gw):
    """Double Schwinger sum using the symmetry I(a1, a2) = I(a2, a1)."""
    total = 0.0
    for i in range(al.size):
        total += wa[i] * wa[i] * pair_integral(al[i], al[i], K, q, a_eff, mu2, gx, gw)
        for j in range(i + 1, al.size):
            total += 2.0 * wa[i] * wa[j] * pair_integral(al[i], al[j], K, q, a_eff, mu2, gx, gw)
    return total


@njit(cache=True)
def _wedge(p, q, theta):
    return theta * (p[0] * q[1] - p[1] * q[0] + p[2] * q[3] - p[3] * q[2])


@njit(cache=True)
def _saddle(al, C, O, A, V, theta, nl, Q, Ps, r, grad):
    """Scalar-sample version of the numpy saddle; fills Q, Ps, r, grad in place."""
    E = C.shape[0]
    for l in range(nl):
        for m in range(nl):
            acc = 0.0
            for e in range(E):
                acc += al[e] * C[e, l] * C[e, m]
            Q[l, m] = acc
    if nl == 1:
        D = Q[0, 0]
        for k in range(4):
            acc = 0.0
            for e in range(E):
                acc += al[e] * C[e, 0] * O[e, k]
            Ps[0, k] = -acc / D
    else:
        D = 0.0
        for l in range(2):
            for k in range(4):
                Ps[l, k] = 0.0
        for f in range(E):
            ef0 = C[f, 1]
            ef1 = -C[f, 0]
            for e in range(E):
                cr = ef0 * C[e, 0] + ef1 * C[e, 1]
                if cr == 0.0:
                    continue
                w = al[e] * al[f] * cr
                D += 0.5 * w * cr
                for k in range(4):
                    Ps[0, k] -= w * ef0 * O[e, k]
                    Ps[1, k] -= w * ef1 * O[e, k]
        for l in range(2):
            for k in range(4):
                Ps[l, k] /= D
    minval = 0.0
    for e in range(E):
        sq = 0.0
        for k in range(4):
            acc = O[e, k]
            for l in range(nl):
                acc += C[e, l] * Ps[l, k]
            r[e, k] = acc
            sq += acc * acc
        minval += al[e] * sq
    phi = 0.0
    for l in range(nl):
        phi += _wedge(Ps[l], V[l], theta)
        for m in range(nl):
            phi += 0.5 * A[l, m] * _wedge(Ps[l], Ps[m], theta)
    for l in range(nl):
        g0 = V[l, 1]
        g1 = -V[l, 0]
        g2 = V[l, 3]
        g3 = -V[l, 2]
        for m in range(nl):
            c = 0.5 * (A[l, m] - A[m, l])
            g0 += c * Ps[m, 1]
            g1 -= c * Ps[m, 0]
            g2 += c * Ps[m, 3]
            g3 -= c * Ps[m, 2]
        grad[l, 0] = theta * g0
        grad[l, 1] = theta * g1
        grad[l, 2] = theta * g2
        grad[l, 3] = theta * g3
    return D, minval, phi


@njit(cache=True)
def _jdot(a, b):
    """a . (J b)."""
    return a[0] * b[1] - a[1] * b[0] + a[2] * b[3] - a[3] * b[2]


@njit(cache=True)
def _closed_form(Q, detQ, minval, phi, grad, kappa, nl):
    D = detQ + kappa * kappa
    if nl == 1:
        quad = 0.0 + 0.0j
        for k in range(4):
            quad -= grad[0, k] * grad[0, k]
        quad /= D
    else:
        s00 = s11 = s01 = 0.0
        for k in range(4):
            s00 += grad[0, k] * grad[0, k]
            s11 += grad[1, k] * grad[1, k]
            s01 += grad[0, k] * grad[1, k]
        quad = -complex(Q[1, 1] * s00 + Q[0, 0] * s11 - 2.0 * Q[0, 1] * s01,
                        2.0 * kappa * _jdot(grad[0], grad[1])) / D
    return np.exp(complex(2.0 * nl * math.log(math.pi) - 2.0 * math.log(D) - minval, phi) + 0.25 * quad)


@njit(cache=True)
def _gaussian(al, C, O, A, V, theta, nl, kappa, Q, Ps, r, grad):
    D, minval, phi = _saddle(al, C, O, A, V, theta, nl, Q, Ps, r, grad)
    return _closed_form(Q, D, minval, phi, grad, kappa, nl)


_j1 = ctypes.CFUNCTYPE(ctypes.c_double, ctypes.c_double)(
    get_cython_function_address("scipy.special.cython_special", "j1"))


# the ctypes pointer to J1 is a dynamic global, which numba cannot cache
@njit(cache=False)
def _hole_kernel(c, t):
    sc = math.sqrt(c)
    return -2.0 * sc * _j1(2.0 * sc * t)


@njit(cache=True)
def _single_direction(al, C, detQ, minval, phi, grad, kappa, u0, u1, z, r_h, cu, c_h):
    """One draw of the marginal along u (orthogonal direction exact), times the hole factor of line h."""
    v0 = -u1
    v1 = u0
    quv = 0.0
    qvv = 0.0
    for e in range(C.shape[0]):
        ce_v = C[e, 0] * v0 + C[e, 1] * v1
        quv += al[e] * (C[e, 0] * u0 + C[e, 1] * u1) * ce_v
        qvv += al[e] * ce_v * ce_v
    m = (detQ + kappa * kappa) / qvv
    gv2 = 0.0
    rr = 0.0
    iy = 0.0
    p2 = 0.0
    for k in range(4):
        gu = u0 * grad[0, k] + u1 * grad[1, k]
        gv = v0 * grad[0, k] + v1 * grad[1, k]
        kk = k ^ 1
        jgv = (v0 * grad[0, kk] + v1 * grad[1, kk]) * (1.0 if k % 2 == 0 else -1.0)
        R = -kappa * jgv / qvv
        I = gu - quv * gv / qvv
        y = R / (2.0 * m) + z[k] / math.sqrt(2.0 * m)
        gv2 += gv * gv
        rr += R * R
        iy += I * y
        pk = r_h[k] + cu * y
        p2 += pk * pk
    log_norm = (4.0 * math.log(math.pi) - 2.0 * math.log(qvv * m) - gv2 / (4.0 * qvv)
                - minval + rr / (4.0 * m))
    hole = math.exp(-c_h / p2) if p2 > 0.0 else 0.0
    return hole * np.exp(complex(log_norm, phi + iy))


@njit(cache=False)
def mc_weights(alpha, inv_pdf, C, O, U, Z, a_eff, mu2, A, V, theta, tu, tw, x_quad, rho_switch):
    S, E = alpha.shape
    nl = C.shape[1]
    nq = tu.size
    kappa = 0.25 * (A[0, 1] - A[1, 0]) * theta if nl == 2 else 0.0
    out = np.empty(S, dtype=np.complex128)
    Q = np.empty((nl, nl))
    Ps = np.empty((nl, 4))
    r = np.empty((E, 4))
    grad = np.empty((nl, 4))
    Q2 = np.empty((nl, nl))
    Ps2 = np.empty((nl, 4))
    r2 = np.empty((E, 4))
    grad2 = np.empty((nl, 4))
    shifted = np.empty(E)
    base = np.empty(E)
    sigma = np.empty(E)
    x_typ = np.empty(E)
    tm = np.empty(E)
    km = np.empty(E)
    P = np.empty((nl, 4))
    nz = 0
    for e in range(E):
        for l in range(nl):
            if C[e, l] != 0.0:
                nz += 1
                break
    lines = np.empty(nz, dtype=np.int64)
    zero_row = np.ones(E, dtype=np.bool_)
    o2 = np.empty(E)
    j = 0
    for e in range(E):
        o2[e] = O[e, 0] ** 2 + O[e, 1] ** 2 + O[e, 2] ** 2 + O[e, 3] ** 2
        for l in range(nl):
            if C[e, l] != 0.0:
                zero_row[e] = False
        if not zero_row[e]:
            lines[j] = e
            j += 1
    log_pi = math.log(math.pi)
    for s in range(S):
        al = alpha[s]
        detQ, minval, phi = _saddle(al, C, O, A, V, theta, nl, Q, Ps, r, grad)
        exact = _closed_form(Q, detQ, minval, phi, grad, kappa, nl)
        asum = 0.0
        for e in range(E):
            asum += al[e]
        pref = inv_pdf[s] * math.exp(-mu2 * asum)
        if a_eff == 0.0:
            out[s] = pref * exact
            continue
        h = 0.0
        for e in range(E):
            if zero_row[e]:
                h += al[e] * a_eff / o2[e] if o2[e] > 0.0 else np.inf
        pref *= math.exp(-h)
        D = detQ + kappa * kappa
        if nl == 2:
            qi00 = Q[1, 1] / detQ
            qi11 = Q[0, 0] / detQ
            qi01 = -Q[0, 1] / detQ
        else:
            qi00 = 1.0 / Q[0, 0]
            qi11 = qi01 = 0.0
        x_max = 0.0
        heavy = lines[0]
        for e in lines:
            if nl == 1:
                cof = C[e, 0] * C[e, 0]
                cqc = cof * qi00
            else:
                cof = Q[1, 1] * C[e, 0] ** 2 + Q[0, 0] * C[e, 1] ** 2 - 2.0 * Q[0, 1] * C[e, 0] * C[e, 1]
                cqc = cof / detQ
            rsq = r[e, 0] ** 2 + r[e, 1] ** 2 + r[e, 2] ** 2 + r[e, 3] ** 2
            sigma[e] = 1.0 / (cof / D + rsq)
            x_typ[e] = al[e] * a_eff / (rsq + 2.0 * cqc)
            xe = al[e] * a_eff * sigma[e]
            if xe > x_max:
                x_max = xe
                heavy = e
        log_real = 2.0 * (nl * log_pi - math.log(detQ)) - minval
        rho = math.exp(math.log(abs(exact)) - log_real) if abs(exact) > 0.0 else 0.0
        suppressed = rho <= rho_switch
        single = suppressed and nl == 2
        expand = nl == 1 and x_max <= x_quad and (suppressed or nz == 1)
        if single:
            # strongest line along its own loop direction, the others expanded
            for e in lines:
                rs = math.sqrt(sigma[e])
                tm[e] = rs * U[s, e] / (1.0 - U[s, e])
                km[e] = rs / (1.0 - U[s, e]) ** 2 * _hole_kernel(al[e] * a_eff, tm[e])
            nrm = math.hypot(C[heavy, 0], C[heavy, 1])
            u0 = C[heavy, 0] / nrm
            u1 = C[heavy, 1] / nrm
            cu = C[heavy, 0] * u0 + C[heavy, 1] * u1
            ch = al[heavy] * a_eff
            total = 0.0 + 0.0j
            for mask in range(2 ** nz):
                skip = False
                fac = 1.0
                for e in range(E):
                    shifted[e] = al[e]
                for i in range(nz):
                    if mask >> i & 1:
                        e = lines[i]
                        if e == heavy:
                            skip = True
                        shifted[e] += tm[e] * tm[e]
                        fac *= km[e]
                if skip:
                    continue
                d2, mv2, ph2 = _saddle(shifted, C, O, A, V, theta, nl, Q2, Ps2, r2, grad2)
                total += fac * _single_direction(shifted, C, d2, mv2, ph2, grad2, kappa, u0, u1, Z[s, 0],
                                                 r2[heavy], cu, ch)
            out[s] = pref * total
            continue
        if not expand:
            # loop momenta from the real Gaussian
            if nl == 1:
                for k in range(4):
                    P[0, k] = Ps[0, k] + math.sqrt(0.5 * qi00) * Z[s, 0, k]
            else:
                l00 = math.sqrt(0.5 * qi00)
                l10 = 0.5 * qi01 / l00
                l11 = math.sqrt(0.5 / Q[1, 1])
                for k in range(4):
                    P[0, k] = Ps[0, k] + l00 * Z[s, 0, k]
                    P[1, k] = Ps[1, k] + l10 * Z[s, 0, k] + l11 * Z[s, 1, k]
            X = 0.0
            for e in lines:
                p2 = 0.0
                for k in range(4):
                    pk = O[e, k]
                    for l in range(nl):
                        pk += C[e, l] * P[l, k]
                    p2 += pk * pk
                X += al[e] * a_eff / p2 if p2 > 0.0 else np.inf
            phase = 0.0
            for l in range(nl):
                phase += _wedge(P[l], V[l], theta)
                for m in range(nl):
                    phase += 0.5 * A[l, m] * _wedge(P[l], P[m], theta)
            out[s] = pref * (exact + math.expm1(-X) * np.exp(complex(log_real, phase)))
            continue
        # Laplace-kernel expansion of the hole product
        for e in lines:
            rs = math.sqrt(sigma[e])
            tm[e] = rs * U[s, e] / (1.0 - U[s, e])
            km[e] = rs / (1.0 - U[s, e]) ** 2 * _hole_kernel(al[e] * a_eff, tm[e])
        total = exact
        for mask in range(1, 2 ** nz):
            heavy = -1
            for i in range(nz):
                if mask >> i & 1:
                    e = lines[i]
                    if heavy < 0 or x_typ[e] > x_typ[heavy]:
                        heavy = e
            fac = 1.0
            for e in range(E):
                base[e] = al[e]
            for i in range(nz):
                e = lines[i]
                if mask >> i & 1 and e != heavy:
                    base[e] += tm[e] * tm[e]
                    fac *= km[e]
            rs = math.sqrt(sigma[heavy])
            acc = 0.0 + 0.0j
            for jq in range(nq):
                uu = tu[jq]
                t = rs * uu / (1.0 - uu)
                for e in range(E):
                    shifted[e] = base[e]
                shifted[heavy] += t * t
                kq = tw[jq] * rs / (1.0 - uu) ** 2 * _hole_kernel(al[heavy] * a_eff, t)
                acc += kq * _gaussian(shifted, C, O, A, V, theta, nl, kappa, Q2, Ps2, r2, grad2)
            total += fac * acc
        out[s] = pref * total
    return out
