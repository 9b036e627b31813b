"""Numerical amplitudes: non-planar and planar tadpoles, the two-propagator
four-point graphs, and a generic Schwinger-parameter Monte Carlo.

Normalisation: no symmetry factors and no coupling constants; every
propagator is represented as the Schwinger integral of exp(-alpha D(p))
over the cutoff window, D(p) = p^2 + mu^2 + a/(theta^2 p^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import integrate

from . import kernels
from ._gl import gauss_legendre, log_alpha_rule, panel_nodes
from .graph import RibbonGraph
from .moyal import wedge
from .multiscale import DomainError, ModelParams, momentum_routing
from .quadrature import QuadratureError, radial_fourier_4d
from .rosette import (_check_conservation, contract_to_rosette, external_kernel,
                      intersection_matrix, spanning_tree)

LOG_FLOOR = 60.0  # exp(-60) is treated as zero when truncating Schwinger ranges
BETA_PANELS = (0.0, 0.3, 0.6, 0.85, 0.97, 1.0)  # u-panels for t = sqrt(beta) = s u / (1 - u)


class MonteCarloError(RuntimeError):
    def __init__(self, message: str, sample: "AmplitudeSample | None" = None):
        super().__init__(message)
        self.sample = sample


@dataclass(frozen=True)
class CutoffSpec:
    """Schwinger window [alpha_min, alpha_max] and an optional hard momentum cutoff."""

    alpha_min: float = 0.0
    alpha_max: float = math.inf
    p_uv: float = math.inf

    def __post_init__(self):
        if not (0.0 <= self.alpha_min < self.alpha_max):
            raise ValueError("cutoff needs 0 <= alpha_min < alpha_max")
        if not self.p_uv > 0:
            raise ValueError("p_uv must be > 0")

    @classmethod
    def slice_window(cls, k: float) -> "CutoffSpec":
        """The IR-regularising window [0, min(k^2, 1/k^2)]."""
        k = float(k)
        if k <= 0:
            raise DomainError("slice window needs k > 0")
        return cls(0.0, min(k * k, 1.0 / (k * k)))

    @classmethod
    def uv(cls, lam: float, alpha_max: float = math.inf) -> "CutoffSpec":
        """Schwinger UV regulator alpha >= 1/Lambda^2."""
        return cls(1.0 / (lam * lam), alpha_max)


@dataclass(frozen=True)
class AmplitudeSample:
    k: float
    value: complex
    abs_err: float
    method: str
    k_vec: tuple[float, ...] | None = None
    ess: float | None = None
    info: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.abs_err >= 0:
            raise ValueError("abs_err must be >= 0")


def _magnitude(k) -> tuple[float, tuple[float, ...] | None]:
    if np.ndim(k) == 0:
        return abs(float(k)), None
    vec = np.asarray(k, dtype=float)
    if vec.shape != (4,):
        raise ValueError("momenta are 4-vectors")
    return float(np.linalg.norm(vec)), tuple(float(v) for v in vec)


def theta_norm(k, theta: float) -> float:
    """|Theta k|, which equals theta |k| for the block form of Theta."""
    from .moyal import theta_matrix

    return float(np.linalg.norm(theta_matrix(theta) @ np.asarray(k, dtype=float)))


def _alpha_top(cut: CutoffSpec, params: ModelParams) -> float:
    if math.isfinite(cut.alpha_max):
        return cut.alpha_max
    if params.d_min <= 0:
        raise DomainError("unbounded Schwinger range with a = mu = 0 is IR divergent")
    return max(LOG_FLOOR / params.d_min, cut.alpha_min * 2.0)


def schwinger_propagator(p, params: ModelParams, cut: CutoffSpec):
    """Integral of exp(-alpha D(p)) over the cutoff window, in closed form."""
    p = np.asarray(p, dtype=float)
    p2 = p * p
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        d = p2 + params.mu2 + np.where(p2 > 0, params.a_eff / np.where(p2 > 0, p2, 1.0),
                                        np.inf if params.a_eff > 0 else 0.0)
        if math.isinf(cut.alpha_max):
            out = np.exp(-cut.alpha_min * d) / d
        else:
            width = cut.alpha_max - cut.alpha_min
            out = np.where(d > 0, np.exp(-cut.alpha_min * d) * -np.expm1(-width * d) / np.where(d > 0, d, 1.0),
                           width)
    return np.where(np.isinf(d), 0.0, out)


def _hole_breaks(scale: float, a_eff: float, alpha: float) -> list[float]:
    out = [scale * m for m in (0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 9.5)]
    if a_eff > 0:
        h = math.sqrt(alpha * a_eff)
        out += [h * m for m in (0.25, 0.5, 1.0, 2.0, 4.0)]
    return out


def _radial_breaks(params: ModelParams, cut: CutoffSpec) -> list[float]:
    pts = [0.5, 1.0, 2.0, 4.0]
    if params.a_eff > 0:
        r = params.a_eff ** 0.25
        pts += [r * m for m in (0.25, 0.5, 1.0, 2.0, 4.0)]
    for alpha in (cut.alpha_min, cut.alpha_max):
        if 0 < alpha < math.inf:
            pts += _hole_breaks(1.0 / math.sqrt(alpha), params.a_eff, alpha)
    return pts


# ---------------------------------------------------------------- tadpoles

def tadpole_nonplanar(k, params: ModelParams = ModelParams(), cut: CutoffSpec | None = None, *,
                      alpha_integration: str = "quadrature", rtol: float = 1e-8,
                      atol: float = 1e-12, alpha_floor: float = 1e-6) -> AmplitudeSample:
    """The tadpole whose loop line crosses an external leg.

    T(k) = int dalpha int d^4p exp(i k^p) exp(-alpha D(p)), evaluated as a
    4D radial Fourier transform at q = |Theta k| = theta |k|.  The alpha
    integral is done by adaptive quadrature (default) or in closed form
    (``alpha_integration="closed_form"``) as an independent route.
    """
    kmag, kvec = _magnitude(k)
    if kmag == 0:
        raise DomainError("the non-planar tadpole needs k != 0")
    cut = cut or CutoffSpec.slice_window(kmag)
    q = params.theta * kmag
    if alpha_integration == "closed_form":
        value, err = radial_fourier_4d(lambda p: schwinger_propagator(p, params, cut), q, cut.p_uv,
                                       breaks=_radial_breaks(params, cut), rtol=rtol, atol=atol)
        return AmplitudeSample(kmag, complex(value), err, "bessel1d", kvec)
    if alpha_integration != "quadrature":
        raise ValueError(f"unknown alpha_integration {alpha_integration!r}")

    top = _alpha_top(cut, params)
    if cut.alpha_min > 0:
        bottom = cut.alpha_min
    elif math.isfinite(cut.p_uv):
        bottom = alpha_floor * min(top, 1.0 / (q * q), 1.0 / cut.p_uv ** 2)
    else:
        # below q^2 / (4 LOG_FLOOR) the Gaussian part is exp(-60)-suppressed
        # and the 1/p^2 correction vanishes like alpha^2
        bottom = min(q * q / (4.0 * LOG_FLOOR), alpha_floor * top)
    inner_err = [0.0]
    split = not math.isfinite(cut.p_uv)
    peak = math.log(q * q / 8.0)

    def inner(t: float) -> float:
        # alpha * R(alpha); without a momentum cutoff R = G - H with the
        # Gaussian part G in closed form and H the 1/p^2 correction, which
        # avoids the cancellation of the oscillatory Gaussian at small alpha.
        alpha = math.exp(t)
        shift = alpha * params.mu2
        gauss = (math.pi / alpha) ** 2 * math.exp(-q * q / (4.0 * alpha) - shift) if split else 0.0
        if split and params.a_eff == 0:
            return alpha * gauss

        def f(p):
            p2 = p * p
            with np.errstate(divide="ignore", over="ignore"):
                if split:
                    return np.exp(-alpha * p2 - shift) * -np.expm1(-alpha * params.a_eff / p2)
                return np.exp(-alpha * (p2 + params.a_eff / p2) - shift)

        val, err = radial_fourier_4d(f, q, cut.p_uv, breaks=_hole_breaks(1 / math.sqrt(alpha), params.a_eff, alpha),
                                     rtol=rtol * 1e-2, atol=atol * 1e-3)
        inner_err[0] = max(inner_err[0], err * alpha)
        return alpha * (gauss - val) if split else alpha * val

    lo, hi = math.log(bottom), math.log(top)
    points = [peak] if lo < peak < hi else None
    value, err = integrate.quad(inner, lo, hi, epsabs=atol, epsrel=rtol, limit=200, points=points)
    # the part of the window below ``bottom`` (only when alpha_min = 0)
    if cut.alpha_min == 0 and bottom > 0:
        err += abs(inner(math.log(bottom))) * 1.0
    err += inner_err[0] * (math.log(top) - math.log(bottom))
    return AmplitudeSample(kmag, complex(value), float(err), "bessel1d", kvec)


def tadpole_planar(params: ModelParams = ModelParams(), p_uv: float = math.inf,
                   cut: CutoffSpec | None = None, *, rtol: float = 1e-8,
                   atol: float = 1e-12) -> AmplitudeSample:
    """The tadpole without phase: int_{|p| <= p_uv} d^4p C(p), C the windowed propagator."""
    cut = cut or CutoffSpec(p_uv=p_uv)
    if math.isfinite(p_uv) and cut.p_uv != p_uv:
        cut = CutoffSpec(cut.alpha_min, cut.alpha_max, p_uv)
    if not math.isfinite(cut.p_uv) and cut.alpha_min == 0:
        raise DomainError("the planar tadpole diverges without an ultraviolet cutoff")
    value, err = radial_fourier_4d(lambda p: schwinger_propagator(p, params, cut), 0.0, cut.p_uv,
                                   breaks=_radial_breaks(params, cut), rtol=rtol, atol=atol)
    return AmplitudeSample(0.0, complex(value), err, "bessel1d", info={"p_uv": cut.p_uv})


# ---------------------------------------------------------------- four-point

def _two_line_alpha_rule(cut: CutoffSpec, params: ModelParams, q: float, n: int,
                         per_decade: float, decades: float):
    top = _alpha_top(cut, params)
    if cut.alpha_min > 0:
        return log_alpha_rule(cut.alpha_min, top, n, per_decade)
    if q == 0:
        raise DomainError("the four-point integral without phase needs alpha_min > 0 (UV divergent)")
    low = top * 10.0 ** (-decades)
    return log_alpha_rule(0.0, top, n, per_decade, linear_below=low, n_linear=max(4, n // 2))


def _two_line_integral(K: float, q: float, params: ModelParams, cut: CutoffSpec, n: int,
                       per_decade: float, decades: float, backend: str | None) -> float:
    al, wa = _two_line_alpha_rule(cut, params, q, n, per_decade, decades)
    gx, gw = gauss_legendre(n)
    gx, gw = np.ascontiguousarray(gx), np.ascontiguousarray(gw)
    return kernels.fourpoint_sum(al, wa, float(K), float(q), params.a_eff, params.mu2,
                                 gx, gw, backend=backend)


def _four_point(K, params, cut, *, phase: bool, n: int, n_check: int, per_decade: float,
                decades: float, backend: str | None, method: str) -> AmplitudeSample:
    kmag, kvec = _magnitude(K)
    q = params.theta * kmag if phase else 0.0
    if cut is None:
        if kmag == 0:
            raise DomainError("K = 0 needs an explicit cutoff")
        cut = CutoffSpec.slice_window(kmag)
    if kmag == 0 and params.a == 0 and params.mu2 == 0:
        raise DomainError("K = 0 with a = mu = 0 is IR divergent")
    if math.isfinite(cut.p_uv):
        raise ValueError("the four-point evaluator uses the Schwinger regulator, not p_uv")
    fine = _two_line_integral(kmag, q, params, cut, n, per_decade, decades, backend)
    coarse = _two_line_integral(kmag, q, params, cut, n_check, per_decade, decades, backend)
    err = abs(fine - coarse) + 1e-14 * abs(fine)
    return AmplitudeSample(kmag, complex(fine), err, method, kvec,
                           info={"coarse": coarse})


def fourpoint_irregular(K, params: ModelParams = ModelParams(), cut: CutoffSpec | None = None, *,
                        n: int = 6, n_check: int = 5, per_decade: float = 1.0, decades: float = 5.0,
                        backend: str | None = None) -> AmplitudeSample:
    """Two-propagator graph with the two legs of each vertex on different faces.

    A(K) = int dalpha1 dalpha2 int d^4p exp(-i p.Theta K)
           exp(-alpha1 D(p) - alpha2 D(p - K)),
    reduced to (x, |p_perp|) with x along K; see ``_geometry``.  The error
    estimate is the difference to a lower-order rule on the same panels.
    """
    return _four_point(K, params, cut, phase=True, n=n, n_check=n_check, per_decade=per_decade,
                       decades=decades, backend=backend, method="reduced3d")


def bubble_regular(K, params: ModelParams = ModelParams(), cut: CutoffSpec | None = None, *,
                   n: int = 6, n_check: int = 5, per_decade: float = 1.0, decades: float = 5.0,
                   backend: str | None = None) -> AmplitudeSample:
    """The same two-propagator integral with no loop phase (single broken face)."""
    return _four_point(K, params, cut, phase=False, n=n, n_check=n_check, per_decade=per_decade,
                       decades=decades, backend=backend, method="reduced3d")


def fourpoint_gaussian_oracle(K, params: ModelParams, cut: CutoffSpec | None = None, *,
                              phase: bool = True, rtol: float = 1e-10) -> tuple[float, float]:
    """a = 0 reference: Gaussian momentum integral in closed form, alpha integrals by scipy.

    Integrand (pi/s)^2 exp(-a1 a2 K^2/s - q^2/(4 s) - s mu^2), s = a1 + a2.
    """
    if params.a != 0:
        raise ValueError("the Gaussian oracle needs a = 0")
    kmag, _ = _magnitude(K)
    cut = cut or CutoffSpec.slice_window(kmag)
    q = params.theta * kmag if phase else 0.0
    top = _alpha_top(cut, params)
    bottom = cut.alpha_min if cut.alpha_min > 0 else top * 1e-14

    def f(t2, t1):
        a1, a2 = math.exp(t1), math.exp(t2)
        s = a1 + a2
        return a1 * a2 * (math.pi / s) ** 2 * math.exp(-a1 * a2 * kmag * kmag / s - q * q / (4 * s) - s * params.mu2)

    lo, hi = math.log(bottom), math.log(top)
    val, err = integrate.dblquad(f, lo, hi, lo, hi, epsabs=1e-14, epsrel=rtol)
    return val, err


# ---------------------------------------------------------------- Monte Carlo

@dataclass(frozen=True)
class _McSetup:
    lines: list[str]
    C: np.ndarray
    O: np.ndarray
    A: np.ndarray
    V: np.ndarray
    const_phase: complex
    loops: tuple[str, ...]


def _mc_setup(g: RibbonGraph, ks: np.ndarray, theta: float) -> _McSetup:
    t = spanning_tree(g)
    routing = momentum_routing(g, t)
    lines, C, X = routing.coefficients(g)
    O = X @ ks if ks.size else np.zeros((len(lines), 4))
    r = contract_to_rosette(g, t)
    imat = intersection_matrix(r)
    nl = len(r.loop_lines)
    first = {}
    for lab, s in zip(r.labels, r.signs):
        first.setdefault(lab, s)
    sgn = np.array([first[l] for l in r.loop_lines], dtype=float)
    I = imat.I.astype(float)
    A = I[:nl, :nl] * np.outer(sgn, sgn)
    V = np.zeros((nl, 4))
    for li in range(nl):
        for ei in range(len(r.externals)):
            V[li] += sgn[li] * I[li, nl + ei] * ks[ei]
    const = 0.0
    for ei in range(len(r.externals)):
        for fi in range(len(r.externals)):
            const += 0.5 * I[nl + ei, nl + fi] * float(wedge(ks[ei], ks[fi], theta))
    _, ext = external_kernel(ks, theta) if len(ks) else (0.0, 1.0 + 0j)
    return _McSetup(lines, C, O, A, V, ext * complex(np.exp(1j * const)), tuple(r.loop_lines))


def external_scale(ks: np.ndarray) -> float:
    """Axis momentum of a configuration: max(|k1|, |k1 + k2|)."""
    if len(ks) == 0:
        return 0.0
    scale = float(np.linalg.norm(ks[0]))
    if len(ks) > 2:
        scale = max(scale, float(np.linalg.norm(ks[0] + ks[1])))
    return scale


def sample_alphas(rng: np.random.Generator, size: tuple[int, int], lo: float, hi: float,
                  with_zero: bool, mix: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
    """Log-uniform alphas on [lo, hi] (plus a uniform [0, lo] component); returns (alpha, 1/pdf)."""
    grid = AlphaGrid(size[1], lo, hi, with_zero, bins=1, mix=mix)
    alpha, inv_pdf, _ = grid.sample(rng, size[0])
    return alpha, inv_pdf


@dataclass
class AlphaGrid:
    """Per-line piecewise log-uniform proposal for Schwinger parameters.

    Bin probabilities are adapted to the marginal |weight| of pilot runs,
    in the spirit of VEGAS with fixed bin edges.
    """

    lines: int
    lo: float
    hi: float
    with_zero: bool
    bins: int = 48
    mix: float = 0.05
    probs: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.edges = np.linspace(math.log(self.lo), math.log(self.hi), self.bins + 1)
        self.probs = np.full((self.lines, self.bins), 1.0 / self.bins)

    def sample(self, rng: np.random.Generator, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        width = self.edges[1] - self.edges[0]
        cdf = np.cumsum(self.probs, axis=1)
        cdf[:, -1] = 1.0
        u = rng.random((m, self.lines))
        b = np.empty((m, self.lines), dtype=np.int64)
        for e in range(self.lines):
            b[:, e] = np.searchsorted(cdf[e], u[:, e], side="right")
        b = np.minimum(b, self.bins - 1)
        t = self.edges[b] + width * rng.random((m, self.lines))
        alpha = np.exp(t)
        pb = np.take_along_axis(self.probs, b.T, axis=1).T
        pdf = pb / (width * alpha)
        if self.with_zero:
            pick = rng.random((m, self.lines)) < self.mix
            alpha = np.where(pick, self.lo * rng.random((m, self.lines)), alpha)
            pdf = np.where(pick, self.mix / self.lo, (1 - self.mix) * pdf)
            b = np.where(pick, -1, b)
        return alpha, np.prod(1.0 / pdf, axis=1), b

    def adapt(self, bins_used: np.ndarray, w: np.ndarray, damp: float = 0.7, floor: float = 0.1) -> None:
        aw = np.abs(w)
        for e in range(self.lines):
            sel = bins_used[:, e] >= 0
            d = np.bincount(bins_used[sel, e], weights=aw[sel], minlength=self.bins)
            if d.sum() <= 0:
                continue
            d = np.convolve(d, [0.25, 0.5, 0.25], mode="same")
            d = (d / d.sum()) ** damp
            d /= d.sum()
            self.probs[e] = (1 - floor) * d + floor / self.bins


def schwinger_mc(g: RibbonGraph, params: ModelParams, external_momenta, cut: CutoffSpec | None = None,
                 n_samples: int = 1_000_000, *, seed: int = 42, alpha_floor: float = 1e-8,
                 min_ess: float = 100.0, batch: int = 200_000, adapt_rounds: int = 4,
                 adapt_samples: int = 50_000, beta_nodes: int = 6, x_quad: float = 1.0, rho_switch: float = 0.05,
                 backend: str | None = None) -> AmplitudeSample:
    """Importance-sampled Monte Carlo of a graph with at most two loops.

    Each line gets a Schwinger parameter from a piecewise log-uniform
    proposal tuned on independent pilot batches.  For fixed alphas the loop
    momenta are either drawn from the Gaussian part of the propagators or,
    where the rosette phase strongly suppresses that Gaussian, integrated
    through a Laplace-kernel expansion of the hole factors exp(-alpha a / p^2)
    that keeps the phase in closed form (see ``kernels.mc_weights``).
    """
    if not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) < 2 ** 64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    labels = g.external_labels()
    if isinstance(external_momenta, Mapping):
        ks = np.array([external_momenta[lab] for lab in labels], dtype=float).reshape(-1, 4)
    else:
        ks = np.asarray(external_momenta, dtype=float).reshape(-1, 4)
    if len(ks) != g.N:
        raise ValueError(f"expected {g.N} external momenta")
    _check_conservation(ks)
    nl = g.loop_count
    if nl > 2:
        raise ValueError(f"schwinger_mc handles at most 2 loops (graph has {nl})")
    kmag = external_scale(ks)
    cut = cut or CutoffSpec.slice_window(kmag if kmag > 0 else 1.0)
    if math.isfinite(cut.p_uv):
        raise ValueError("schwinger_mc uses the Schwinger regulator, not p_uv")
    setup = _mc_setup(g, ks, params.theta)
    kvec = tuple(float(v) for v in ks[0]) if g.N else None
    if nl == 0:
        norms = np.linalg.norm(setup.O, axis=1)
        value = setup.const_phase * complex(np.prod(schwinger_propagator(norms, params, cut)))
        return AmplitudeSample(kmag, value, 0.0, "schwinger_mc", kvec, float(n_samples))

    top = _alpha_top(cut, params)
    with_zero = cut.alpha_min == 0
    lo = cut.alpha_min if not with_zero else top * alpha_floor
    rng = np.random.default_rng(int(seed))
    E = len(setup.lines)
    grid = AlphaGrid(E, lo, top, with_zero)
    tu, tw = panel_nodes(np.array(BETA_PANELS), beta_nodes)

    def weights(m):
        alpha, inv_pdf, b = grid.sample(rng, m)
        U = rng.random((m, E))
        Z = rng.standard_normal((m, nl, 4))
        w = kernels.mc_weights(np.ascontiguousarray(alpha), inv_pdf, setup.C, setup.O, U, Z,
                               params.a_eff, params.mu2, setup.A, setup.V, params.theta,
                               tu, tw, x_quad, rho_switch, backend=backend)
        return w, b

    for _ in range(adapt_rounds):
        w, b = weights(adapt_samples)
        grid.adapt(b, w)
    s1 = 0.0 + 0.0j
    s_re2 = s_im2 = s_abs = s_abs2 = 0.0
    done = 0
    while done < n_samples:
        m = min(batch, n_samples - done)
        w, _ = weights(m)
        s1 += complex(w.sum())
        s_re2 += float(np.sum(w.real ** 2))
        s_im2 += float(np.sum(w.imag ** 2))
        aw = np.abs(w)
        s_abs += float(aw.sum())
        s_abs2 += float(np.sum(aw * aw))
        done += m
    mean = s1 / n_samples
    var_re = max(s_re2 / n_samples - mean.real ** 2, 0.0)
    var_im = max(s_im2 / n_samples - mean.imag ** 2, 0.0)
    err = math.sqrt((var_re + var_im) / max(n_samples - 1, 1))
    ess = s_abs ** 2 / s_abs2 if s_abs2 > 0 else 0.0
    sample = AmplitudeSample(kmag, setup.const_phase * mean, err, "schwinger_mc", kvec, ess,
                             info={"err_re": math.sqrt(var_re / max(n_samples - 1, 1)),
                                   "err_im": math.sqrt(var_im / max(n_samples - 1, 1))})
    if ess < min_ess:
        raise MonteCarloError(f"effective sample size collapsed to {ess:.1f}", sample)
    return sample
