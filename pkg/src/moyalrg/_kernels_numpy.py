"""Pure-numpy kernels (vectorised over the inner grid / the sample axis)."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import j1

from ._geometry import pair_setup


def pair_integral(al1, al2, K, q, a_eff, mu2, gx, gw):
    """Momentum integral of the two-propagator integrand at fixed (al1, al2)."""
    s, c, x, wx, r, W = pair_setup(al1, al2, K, q, a_eff, gx, gw)
    base = al1 * al2 * K * K / s + s * mu2
    gx_part = wx * np.exp(-s * (x - c) ** 2 - base)
    if a_eff > 0.0:
        r2 = r * r
        hole = np.exp(-al1 * a_eff / ((x * x)[:, None] + r2[None, :])
                      - al2 * a_eff / (((x - K) ** 2)[:, None] + r2[None, :]))
        total = gx_part @ (hole @ W)
    else:
        total = gx_part.sum() * W.sum()
    if q > 0.0:
        return 4.0 * math.pi / q * total.imag
    return 4.0 * math.pi * total.real


def fourpoint_sum(al, wa, K, q, a_eff, mu2, gx, gw):
    """Double Schwinger sum using the symmetry I(a1, a2) = I(a2, a1)."""
    total = 0.0
    for i in range(al.size):
        total += wa[i] * wa[i] * pair_integral(al[i], al[i], K, q, a_eff, mu2, gx, gw)
        for j in range(i + 1, al.size):
            total += 2.0 * wa[i] * wa[j] * pair_integral(al[i], al[j], K, q, a_eff, mu2, gx, gw)
    return total


def _wedge(p, q, theta):
    return theta * (p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0]
                    + p[..., 2] * q[..., 3] - p[..., 3] * q[..., 2])


def _jvec(v):
    """J v with J = Theta / theta, acting on the last axis (length 4)."""
    return np.stack([v[..., 1], -v[..., 0], v[..., 3], -v[..., 2]], axis=-1)


def _kappa(A, theta):
    return 0.25 * (A[0, 1] - A[1, 0]) * theta if A.shape[0] == 2 else 0.0


def _saddle(alpha, C, O, A, V, theta):
    """Real saddle P* of the Gaussian part and the expansion of the phase around it.

    Returns Q, P*, the line momenta r_e at P*, the Gaussian minimum as a sum
    of squares, the phase at P* and its gradient.
    """
    nl = C.shape[1]
    Q = (alpha @ (C[:, :, None] * C[:, None, :]).reshape(len(C), nl * nl)).reshape(-1, nl, nl)
    if nl == 1:
        D = Q[:, 0, 0]
        Ps = -(alpha @ (C[:, 0, None] * O))[:, None, :] / D[:, None, None]
    else:
        # det Q and adj(Q) B as sums over line pairs: no cancellation when
        # one alpha dominates
        eC = np.stack([C[:, 1], -C[:, 0]], axis=1)
        cross = eC @ C.T
        D = 0.5 * np.sum((alpha @ cross ** 2) * alpha, axis=1)
        Y = (alpha[:, None, :] * cross[None]) @ O
        adjB = np.einsum("sfl,sfk->slk", alpha[:, :, None] * eC[None], Y)
        Ps = -adjB / D[:, None, None]
    r = np.matmul(C, Ps) + O[None]
    minval = np.sum(alpha * np.sum(r * r, axis=2), axis=1)
    phi = 0.5 * np.einsum("lm,slm->s", A, _wedge(Ps[:, :, None, :], Ps[:, None, :, :], theta))
    phi = phi + np.sum(_wedge(Ps, V[None], theta), axis=1)
    grad = theta * (0.5 * np.einsum("lm,smk->slk", A - A.T, _jvec(Ps)) + _jvec(V)[None])
    return Q, D, Ps, r, minval, phi, grad


def _closed_form(Q, detQ, minval, phi, grad, kappa):
    """Gaussian-with-phase integral, given the saddle data.

    For two loops the antisymmetric part of A couples the loops through
    kappa (eps x J); the determinant det Q + kappa^2 stays real.
    """
    nl = Q.shape[1]
    D = detQ + kappa ** 2
    if nl == 1:
        quad = -np.sum(grad[:, 0] ** 2, axis=1) / D
    else:
        g0, g1 = grad[:, 0], grad[:, 1]
        quad = -(Q[:, 1, 1] * np.sum(g0 * g0, axis=1) + Q[:, 0, 0] * np.sum(g1 * g1, axis=1)
                 - 2.0 * Q[:, 0, 1] * np.sum(g0 * g1, axis=1)
                 + 2j * kappa * np.sum(g0 * _jvec(g1), axis=1)) / D
    return np.exp(2.0 * nl * math.log(math.pi) - 2.0 * np.log(D) + 0.25 * quad - minval + 1j * phi)


def gaussian_with_phase(alpha, C, O, A, V, theta):
    """Exact loop-momentum integral of exp(-sum alpha_e p_e^2) times the rosette phase."""
    Q, detQ, _, _, minval, phi, grad = _saddle(alpha, C, O, A, V, theta)
    return _closed_form(Q, detQ, minval, phi, grad, _kappa(A, theta))


def _line_scales(alpha, C, O, A, V, theta, a_eff):
    """Per line: the beta scale on which G(alpha + beta delta_e) decays, and the
    typical X_e = alpha_e a / <p_e^2> under the Gaussian."""
    nl = C.shape[1]
    Q, detQ, _, r, _, _, _ = _saddle(alpha, C, O, A, V, theta)
    D = detQ + _kappa(A, theta) ** 2
    if nl == 1:
        cof = np.ones((len(alpha), len(C))) * (C[:, 0] ** 2)[None]
        cqc = cof / Q[:, 0, 0][:, None]
    else:
        quad = (Q[:, 1, 1, None] * C[None, :, 0] ** 2 + Q[:, 0, 0, None] * C[None, :, 1] ** 2
                - 2.0 * Q[:, 0, 1, None] * C[None, :, 0] * C[None, :, 1])
        cof = quad
        cqc = quad / detQ[:, None]
    r2 = np.sum(r * r, axis=2)
    sigma = 1.0 / (cof / D[:, None] + r2)
    with np.errstate(divide="ignore"):
        x_typ = alpha * a_eff / (r2 + 2.0 * cqc)
    return sigma, x_typ


def hole_kernel(c, t):
    """Weight in t = sqrt(beta) with exp(-c/p^2) - 1 = int_0^inf dt K exp(-t^2 p^2)."""
    sc = np.sqrt(c)
    return -2.0 * sc * j1(2.0 * sc * t)


def _inverse_and_root(Q, detQ):
    """Q^-1 and the Cholesky factor of Q^-1 / 2, using the stable determinant."""
    if Q.shape[1] == 1:
        Qinv = 1.0 / Q
        return Qinv, np.sqrt(0.5 * Qinv)
    Qinv = np.empty_like(Q)
    Qinv[:, 0, 0] = Q[:, 1, 1] / detQ
    Qinv[:, 1, 1] = Q[:, 0, 0] / detQ
    Qinv[:, 0, 1] = Qinv[:, 1, 0] = -Q[:, 0, 1] / detQ
    L = np.zeros_like(Q)
    L[:, 0, 0] = np.sqrt(0.5 * Qinv[:, 0, 0])
    L[:, 1, 0] = 0.5 * Qinv[:, 1, 0] / L[:, 0, 0]
    L[:, 1, 1] = np.sqrt(0.5 / Q[:, 1, 1])
    return Qinv, L


def _expansion(alpha, C, O, A, V, theta, U, tu, tw, lines, sigma, x_typ, exact, a_eff):
    """Expanded hole product: the heaviest line of each term by quadrature, the others by one draw."""
    S = len(alpha)
    c = alpha * a_eff
    rows = np.arange(S)
    rs = np.sqrt(sigma)
    tq = rs[:, :, None] * (tu / (1.0 - tu))[None, None, :]
    kq = (tw / (1.0 - tu) ** 2)[None, None, :] * rs[:, :, None] * hole_kernel(c[:, :, None], tq)
    tm = rs * U / (1.0 - U)
    km = rs / (1.0 - U) ** 2 * hole_kernel(c, tm)
    total = exact.copy()
    for mask in range(1, 2 ** lines.size):
        sel = lines[[i for i in range(lines.size) if mask >> i & 1]]
        heavy = sel[np.argmax(x_typ[:, sel], axis=1)]
        base = alpha.copy()
        fac = np.ones(S, dtype=complex)
        for e in sel:
            light = heavy != e
            base[:, e] += np.where(light, tm[:, e] ** 2, 0.0)
            fac *= np.where(light, km[:, e], 1.0)
        for j in range(tu.size):
            shifted = base.copy()
            shifted[rows, heavy] += tq[rows, heavy, j] ** 2
            total += fac * kq[rows, heavy, j] * gaussian_with_phase(shifted, C, O, A, V, theta)
    return total


def _single_direction(alpha, C, detQ, minval, phi, grad, kappa, u, y_normal):
    """Integrate the loop direction orthogonal to u exactly (two loops).

    Returns the offset y from the saddle along u and a complex factor whose
    expectation over y is the closed-form integral.  The marginal of y is a
    real Gaussian whose precision (det Q + kappa^2) / q_vv includes the
    phase coupling.
    """
    v = np.stack([-u[:, 1], u[:, 0]], axis=1)
    cu = np.einsum("el,sl->se", C, u)
    cv = np.einsum("el,sl->se", C, v)
    quv = np.sum(alpha * cu * cv, axis=1)
    qvv = np.sum(alpha * cv * cv, axis=1)
    gu = np.einsum("sl,slk->sk", u, grad)
    gv = np.einsum("sl,slk->sk", v, grad)
    m = (detQ + kappa ** 2) / qvv
    Ly = 1j * gu - (1j * quv[:, None] * gv + kappa * _jvec(gv)) / qvv[:, None]
    R, I = Ly.real, Ly.imag
    y = R / (2.0 * m[:, None]) + y_normal / np.sqrt(2.0 * m)[:, None]
    log_norm = (4.0 * math.log(math.pi) - 2.0 * np.log(qvv * m) - np.sum(gv * gv, axis=1) / (4.0 * qvv)
                - minval + np.sum(R * R, axis=1) / (4.0 * m))
    return y, np.exp(log_norm + 1j * (phi + np.sum(I * y, axis=1)))


def _heavy_line(alpha, C, O, A, V, theta, U, Z, lines, heavy, sigma, a_eff):
    """One line sampled along its own loop direction, the others expanded with one draw each."""
    S = len(alpha)
    kappa = _kappa(A, theta)
    rows = np.arange(S)
    c = alpha * a_eff
    rs = np.sqrt(sigma)
    tm = rs * U / (1.0 - U)
    km = rs / (1.0 - U) ** 2 * hole_kernel(c, tm)
    u = C[heavy] / np.linalg.norm(C[heavy], axis=1)[:, None]
    cu = np.sum(C[heavy] * u, axis=1)
    total = np.zeros(S, dtype=complex)
    for mask in range(2 ** lines.size):
        sel = lines[[i for i in range(lines.size) if mask >> i & 1]]
        shifted = alpha.copy()
        fac = np.ones(S, dtype=complex)
        skip = np.zeros(S, bool)
        for e in sel:
            skip |= heavy == e
            shifted[:, e] += np.where(heavy == e, 0.0, tm[:, e] ** 2)
            fac *= km[:, e]
        _, detQ, _, r, minval, phi, grad = _saddle(shifted, C, O, A, V, theta)
        y, g = _single_direction(shifted, C, detQ, minval, phi, grad, kappa, u, Z[:, 0])
        p = r[rows, heavy] + cu[:, None] * y
        with np.errstate(divide="ignore"):
            h = np.exp(-c[rows, heavy] / np.sum(p * p, axis=1))
        total += np.where(skip, 0.0, fac * g * h)
    return total


def mc_weights(alpha, inv_pdf, C, O, U, Z, a_eff, mu2, A, V, theta, tu, tw, x_quad, rho_switch):
    """Complex Monte-Carlo weights, one per sample (see amplitude.schwinger_mc).

    For fixed alphas the Gaussian-with-phase integral G is exact.  How the
    hole factors are integrated is chosen per sample from the phase
    suppression rho = |G| / G_real:

    * rho > ``rho_switch``: loop momenta from the real Gaussian (normals Z),
      observable G_real exp(i phase) (prod h - 1) added to G;
    * suppressed, two loops: the strongest line (largest c_e sigma_e) is
      sampled along its own loop direction with the orthogonal direction
      integrated exactly, and the other hole factors are expanded as
      exp(-c/p^2) = 1 + int dbeta K_c(beta) exp(-beta p^2) with one draw
      each from the uniforms U;
    * one loop, suppressed or a single line, c_e sigma_e <= ``x_quad``: the
      expanded product with the heaviest line of each term on the rule
      (tu, tw) over u in (0, 1), t = sqrt(beta) = sqrt(sigma_e) u / (1 - u).
      With a single line this is deterministic.
    """
    S, E = alpha.shape
    nl = C.shape[1]
    Q, detQ, Ps, r, minval, phi, grad = _saddle(alpha, C, O, A, V, theta)
    exact = _closed_form(Q, detQ, minval, phi, grad, _kappa(A, theta))
    mass = np.exp(-mu2 * alpha.sum(axis=1))
    if a_eff == 0.0:
        return inv_pdf * mass * exact
    zero_row = ~np.any(C != 0, axis=1)
    o2 = np.sum(O * O, axis=1)
    with np.errstate(divide="ignore"):
        h0 = np.exp(-np.sum(alpha[:, zero_row] * a_eff / o2[zero_row], axis=1)) if zero_row.any() else np.ones(S)
    lines = np.nonzero(~zero_row)[0]
    sigma, x_typ = _line_scales(alpha, C, O, A, V, theta, a_eff)
    x_eff = alpha[:, lines] * a_eff * sigma[:, lines]
    log_real = 2.0 * (nl * math.log(math.pi) - np.log(detQ)) - minval
    with np.errstate(divide="ignore"):
        rho = np.exp(np.log(np.abs(exact)) - log_real)
    suppressed = rho <= rho_switch
    if nl == 2:
        expand = np.zeros(S, bool)
        single = suppressed
    else:
        expand = (np.max(x_eff, axis=1) <= x_quad) & (suppressed | (lines.size == 1))
        single = np.zeros(S, bool)
    sampled = ~expand & ~single
    total = np.zeros(S, dtype=complex)

    idx = np.nonzero(sampled)[0]
    if idx.size:
        _, Ls = _inverse_and_root(Q[idx], detQ[idx])
        P = Ps[idx] + np.einsum("slm,smk->slk", Ls, Z[idx])
        p = np.matmul(C[lines], P) + O[lines][None]
        with np.errstate(divide="ignore"):
            X = np.sum(alpha[idx][:, lines] * a_eff / np.sum(p * p, axis=2), axis=1)
        phase = 0.5 * np.einsum("lm,slm->s", A, _wedge(P[:, :, None, :], P[:, None, :, :], theta))
        phase = phase + np.sum(_wedge(P, V[None, :, :], theta), axis=1)
        total[idx] = exact[idx] + np.expm1(-X) * np.exp(log_real[idx] + 1j * phase)

    idx = np.nonzero(expand)[0]
    if idx.size:
        total[idx] = _expansion(alpha[idx], C, O, A, V, theta, U[idx], tu, tw, lines,
                                sigma[idx], x_typ[idx], exact[idx], a_eff)

    idx = np.nonzero(single)[0]
    if idx.size:
        heavy = lines[np.argmax(x_eff[idx], axis=1)]
        total[idx] = _heavy_line(alpha[idx], C, O, A, V, theta, U[idx], Z[idx], lines, heavy,
                                 sigma[idx], a_eff)
    return inv_pdf * mass * h0 * total
