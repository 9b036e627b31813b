"""Divergence structure from amplitude scans.

Infrared fits of c/k^2 + c' ln k^2 + d0, ultraviolet growth laws, the
k -> 0 limit of k^2 A(k) for two-broken-face two-point graphs, and the
planar/non-planar classification table measured from scans.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .amplitude import (AmplitudeSample, CutoffSpec, MonteCarloError, bubble_regular,
                        fourpoint_irregular, schwinger_mc, tadpole_nonplanar, tadpole_planar)
from .catalog import catalog_get, catalog_names
from .graph import RibbonGraph
from .multiscale import DomainError, ModelParams
from .quadrature import QuadratureError
from .topology import DivergenceClass, GraphClass, divergence_class, topology_report

AXES = ("k_ir", "lambda_uv")
MIN_POINTS = 8
REL_FLOOR = 1e-6        # relative error floor used to weight deterministic data
SELECT_RATIO = 10.0     # residual ratio required to prefer one UV law over the other
BOUNDED_TOL = 0.01      # relative change per decade below which a scan counts as bounded

TABLE_LABEL = {
    DivergenceClass.RENORMALIZABLE_DIVERGENT: "ren.",
    DivergenceClass.FINITE_RENORMALIZATION: "finite ren.",
    DivergenceClass.CONVERGENT: "convergent",
}


class FitError(ValueError):
    """A scan that cannot support the requested fit."""


class ExtrapolationError(FitError):
    """The k -> 0 tail is not monotone beyond its noise."""


@dataclass(frozen=True)
class ScanSeries:
    axis: str
    x: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    params: ModelParams | None = None
    graph: str | None = None

    def __post_init__(self):
        if self.axis not in AXES:
            raise FitError(f"axis must be one of {AXES}")
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        e = np.asarray(self.errors, dtype=float)
        if not (x.shape == v.shape == e.shape) or x.ndim != 1:
            raise FitError("x, values and errors must be 1-d arrays of equal length")
        if len(x) < MIN_POINTS:
            raise FitError(f"a scan needs at least {MIN_POINTS} points (got {len(x)})")
        d = np.diff(x)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise FitError("axis values must be strictly monotone")
        if np.any(e < 0) or not np.all(np.isfinite(v)):
            raise FitError("values must be finite and errors >= 0")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "errors", e)

    @classmethod
    def from_samples(cls, axis: str, x: Sequence[float], samples: Sequence[AmplitudeSample],
                     params: ModelParams | None = None, graph: str | None = None) -> "ScanSeries":
        return cls(axis, np.asarray(x, dtype=float), np.array([s.value for s in samples]),
                   np.array([s.abs_err for s in samples]), params, graph)

    def sorted(self) -> "ScanSeries":
        order = np.argsort(self.x)
        return ScanSeries(self.axis, self.x[order], self.values[order], self.errors[order],
                          self.params, self.graph)


@dataclass(frozen=True)
class FitResult:
    model: str
    coefficients: Mapping[str, float]
    stderr: Mapping[str, float]
    residual_norm: float
    r_squared: float
    outcome: str = ""
    info: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.r_squared <= 1.0:
            raise ValueError("r_squared must lie in [0, 1]")
        if any(not e >= 0 for e in self.stderr.values()):
            raise ValueError("standard errors must be >= 0")

    def report(self) -> str:
        parts = [f"{name} = {self.coefficients[name]:.6g} +- {self.stderr[name]:.2g}"
                 for name in self.coefficients]
        head = self.outcome or self.model
        return f"{head}: " + ", ".join(parts) + f"; r2 = {self.r_squared:.6f}"


# ---------------------------------------------------------------- least squares

def _sigma(values: np.ndarray, errors: np.ndarray) -> np.ndarray:
    s = np.hypot(errors, REL_FLOOR * np.abs(values))
    if np.any(s <= 0):
        raise FitError("zero values with zero errors cannot be weighted")
    return s


@dataclass(frozen=True)
class _Lsq:
    beta: np.ndarray
    cov: np.ndarray
    chi2: float
    r2: float
    resid: np.ndarray


def _weighted_lsq(X: np.ndarray, y: np.ndarray, sigma: np.ndarray, cond_max: float = 1e12) -> _Lsq:
    A = X / sigma[:, None]
    b = y / sigma
    scale = np.linalg.norm(A, axis=0)
    if np.any(scale == 0):
        raise FitError("degenerate design matrix (empty column)")
    As = A / scale
    if np.linalg.cond(As) > cond_max:
        raise FitError("ill-conditioned design matrix; widen the grid")
    sol, *_ = np.linalg.lstsq(As, b, rcond=None)
    beta = sol / scale
    resid = b - A @ beta
    n, p = A.shape
    chi2 = float(resid @ resid)
    dof = max(n - p, 1)
    cov = np.linalg.inv(As.T @ As) / np.outer(scale, scale) * max(chi2 / dof, 1.0)
    mean = np.sum(b * (1 / sigma)) / np.sum(1 / sigma ** 2)
    tss = float(np.sum((b - mean / sigma) ** 2))
    r2 = 1.0 - chi2 / tss if tss > 0 else 1.0
    return _Lsq(beta, cov, chi2, min(max(r2, 0.0), 1.0), resid)


# ---------------------------------------------------------------- infrared

IR_NAMES = ("c", "c_log", "d0")


def _ir_design(k: np.ndarray, extra: bool) -> np.ndarray:
    cols = [k ** -2, np.log(k * k), np.ones_like(k)]
    if extra:
        cols.append(k * k)
    return np.stack(cols, axis=1)


def fit_ir_structure(s: ScanSeries, k_max: float | None = None, min_decades: float = 2.0) -> FitResult:
    """Fit Re A(k) = c / k^2 + c_log ln k^2 + d0 over the scan (k <= k_max).

    Standard errors combine the weighted least-squares covariance with the
    shift each coefficient undergoes when a k^2 term is added, which bounds
    the error of truncating the analytic remainder to a constant.
    """
    if s.axis != "k_ir":
        raise FitError("fit_ir_structure needs a k_ir scan")
    s = s.sorted()
    sel = np.ones(len(s.x), bool) if k_max is None else s.x <= k_max
    k, y, e = s.x[sel], s.values.real[sel], s.errors[sel]
    if len(k) < MIN_POINTS:
        raise FitError(f"fit window holds fewer than {MIN_POINTS} points")
    if np.any(k <= 0) or k.max() > 1.0 or math.log10(k.max() / k.min()) < min_decades - 1e-9:
        raise FitError(f"the IR fit needs 0 < k <= 1 spanning at least {min_decades:g} decades")
    sigma = _sigma(y, e)
    base = _weighted_lsq(_ir_design(k, False), y, sigma)
    ext = _weighted_lsq(_ir_design(k, True), y, sigma)
    trunc = np.abs(base.beta - ext.beta[:3])
    err = np.sqrt(np.diag(base.cov) + trunc ** 2)
    coeffs = dict(zip(IR_NAMES, map(float, base.beta)))
    return FitResult("ir_structure", coeffs, dict(zip(IR_NAMES, map(float, err))),
                     float(np.linalg.norm(base.resid * sigma)), base.r2,
                     info={"chi2": base.chi2, "k_min": float(k.min()), "k_max": float(k.max())})


# ---------------------------------------------------------------- ultraviolet

def fit_uv_divergence(s: ScanSeries, bounded_tol: float = BOUNDED_TOL,
                      ratio: float = SELECT_RATIO) -> FitResult:
    """Fit A ~ amp * Lambda^rho and A ~ slope ln Lambda + b; pick by residual.

    ``outcome`` is ``power_law`` or ``log_law`` when one residual is at least
    ``ratio`` times smaller than the other, ``bounded`` when the last decade
    changes by less than ``bounded_tol`` (or by less than three standard
    errors), and ``other`` otherwise.
    """
    if s.axis != "lambda_uv":
        raise FitError("fit_uv_divergence needs a lambda_uv scan")
    s = s.sorted()
    lam, y, e = s.x, s.values.real, s.errors
    if np.any(lam <= 0) or math.log10(lam[-1] / lam[0]) < 2.0 - 1e-9:
        raise FitError("the UV fit needs Lambda > 0 spanning at least two decades")
    sigma = _sigma(y, e)
    L = np.log(lam)
    one = np.ones_like(L)

    log_fit = _weighted_lsq(np.stack([L, one], axis=1), y, sigma)
    log_model = log_fit.beta[0] * L + log_fit.beta[1]
    r_log = float(np.linalg.norm((y - log_model) / np.abs(y).max()))

    same_sign = np.all(y > 0) or np.all(y < 0)
    if same_sign:
        sgn = float(np.sign(y[0]))
        pw = _weighted_lsq(np.stack([L, one], axis=1), np.log(np.abs(y)), sigma / np.abs(y))
        pow_model = sgn * np.exp(pw.beta[1] + pw.beta[0] * L)
        r_pow = float(np.linalg.norm((y - pow_model) / np.abs(y).max()))
    else:
        pw, r_pow = None, math.inf

    # change over the last decade, with its combined error
    tail = lam >= lam[-1] / 10.0
    i0 = int(np.argmax(tail))
    change = abs(y[-1] - y[i0]) / max(abs(y[-1]), 1e-300)
    change_err = math.hypot(sigma[-1], sigma[i0]) / max(abs(y[-1]), 1e-300)
    decade = math.log10(lam[-1] / lam[i0])
    per_decade = change / decade if decade > 0 else change

    if per_decade < bounded_tol or change < 3.0 * change_err:
        outcome = "bounded"
    elif r_pow * ratio <= r_log:
        outcome = "power_law"
    elif r_log * ratio <= r_pow:
        outcome = "log_law"
    else:
        outcome = "other"

    info = {"r_pow": r_pow, "r_log": r_log, "per_decade": per_decade,
            "change_sigma": change / change_err if change_err > 0 else math.inf}
    use_pow = pw is not None and (outcome == "power_law" or (outcome != "log_law" and r_pow < r_log))
    if use_pow:
        coeffs = {"rho": float(pw.beta[0]), "amp": float(sgn * math.exp(pw.beta[1]))}
        err = {"rho": float(math.sqrt(pw.cov[0, 0])),
               "amp": float(abs(coeffs["amp"]) * math.sqrt(pw.cov[1, 1]))}
        return FitResult("power_law", coeffs, err, r_pow, pw.r2, outcome, info)
    coeffs = {"slope": float(log_fit.beta[0]), "offset": float(log_fit.beta[1])}
    err = {"slope": float(math.sqrt(log_fit.cov[0, 0])), "offset": float(math.sqrt(log_fit.cov[1, 1]))}
    return FitResult("log_law", coeffs, err, r_log, log_fit.r2, outcome, info)


# ---------------------------------------------------------------- finite shift of a

@dataclass(frozen=True)
class FiniteShift:
    value: float
    abs_err: float
    tail_variation: float
    points: int


def _neville_at_zero(x: np.ndarray, y: np.ndarray) -> float:
    p = np.array(y, dtype=float)
    n = len(x)
    for m in range(1, n):
        for i in range(n - m):
            p[i] = (x[i + m] * p[i] - x[i] * p[i + 1]) / (x[i + m] - x[i])
    return float(p[0])


def _lagrange_at_zero(x: np.ndarray) -> np.ndarray:
    out = np.ones(len(x))
    for i in range(len(x)):
        for j in range(len(x)):
            if i != j:
                out[i] *= x[j] / (x[j] - x[i])
    return out


def finite_a_shift(s: ScanSeries, n_last: int = 4) -> FiniteShift:
    """lim k -> 0 of k^2 Re A(k) by polynomial extrapolation in k.

    Uses the ``n_last`` smallest-k points; the error is the change against
    the extrapolation from one point fewer plus the propagated data errors.
    ``tail_variation`` is the relative spread of k^2 A over the last decade.
    """
    if s.axis != "k_ir":
        raise FitError("finite_a_shift needs a k_ir scan")
    if s.params is not None and s.params.a <= 0:
        raise FitError("the finite shift of a needs a > 0")
    s = s.sorted()
    k = s.x
    y = k * k * s.values.real
    ye = k * k * s.errors
    if n_last < 2 or n_last > len(k):
        raise FitError("n_last out of range")
    kx, yx, ex = k[:n_last], y[:n_last], ye[:n_last]
    steps = np.diff(yx)
    noise = np.hypot(ex[1:], ex[:-1]) * 3.0 + 1e-13 * np.abs(yx[1:])
    big = np.abs(steps) > noise
    signs = np.sign(steps[big])
    if signs.size and not (np.all(signs > 0) or np.all(signs < 0)):
        raise ExtrapolationError("k^2 A(k) is not monotone over the extrapolation tail")
    full = _neville_at_zero(kx, yx)
    fewer = _neville_at_zero(kx[:-1], yx[:-1])
    prop = float(np.sum(np.abs(_lagrange_at_zero(kx)) * ex))
    last = k <= k[0] * 10.0 * (1 + 1e-12)
    yl = y[last]
    variation = float((yl.max() - yl.min()) / abs(yl.mean())) if yl.mean() != 0 else math.inf
    return FiniteShift(full, abs(full - fewer) + prop, variation, n_last)


# ---------------------------------------------------------------- classification table

Evaluator = Callable[[float, CutoffSpec], AmplitudeSample]


@dataclass(frozen=True)
class TableRow:
    graph: str
    klass: GraphClass
    N: int
    predicted: DivergenceClass
    measured: DivergenceClass | None
    evidence: str

    @property
    def mismatch(self) -> bool:
        return self.measured is not None and self.measured != self.predicted


@dataclass(frozen=True)
class ClassificationTable:
    rows: tuple[TableRow, ...]

    @property
    def mismatches(self) -> list[TableRow]:
        return [r for r in self.rows if r.mismatch]

    def matrix(self) -> dict[tuple[str, int], str]:
        """(class, N) -> table label, from measured classes; 'mixed' on disagreement."""
        cells: dict[tuple[str, int], set[str]] = {}
        for r in self.rows:
            if r.measured is not None and r.N in (2, 4):
                cells.setdefault((r.klass.value, r.N), set()).add(TABLE_LABEL[r.measured])
        return {key: next(iter(v)) if len(v) == 1 else "mixed" for key, v in cells.items()}

    def render(self) -> str:
        m = self.matrix()
        lines = [f"{'':18s}{'2-points':>14s}{'4-points':>14s}"]
        for klass in GraphClass:
            cells = [m.get((klass.value, n), "-") for n in (2, 4)]
            lines.append(f"{klass.value:18s}{cells[0]:>14s}{cells[1]:>14s}")
        for r in self.rows:
            meas = TABLE_LABEL[r.measured] if r.measured is not None else "unmeasured"
            flag = "  MISMATCH" if r.mismatch else ""
            lines.append(f"{r.graph}: {r.klass.value} N={r.N} predicted={TABLE_LABEL[r.predicted]} "
                         f"measured={meas} ({r.evidence}){flag}")
        return "\n".join(lines)


def external_momenta(N: int, k: float) -> np.ndarray:
    """k e1, -k e1 for two legs; +-(k/2) e1 pairs for four legs."""
    e1 = np.array([1.0, 0.0, 0.0, 0.0])
    if N == 2:
        return np.stack([k * e1, -k * e1])
    if N == 4:
        return np.stack([0.5 * k * e1, 0.5 * k * e1, -0.5 * k * e1, -0.5 * k * e1])
    raise ValueError("standard momenta are defined for 2 and 4 legs")


def evaluator_for(name: str, g: RibbonGraph, params: ModelParams, *, seed: int = 42,
                  n_samples: int = 1_000_000) -> tuple[str, Evaluator] | None:
    """Method tag and a callable (k, cut) -> AmplitudeSample, or None if unsupported."""
    if name == "tadpole_np":
        return "bessel1d", lambda k, cut: tadpole_nonplanar(k, params, cut)
    if name == "tadpole_planar":
        return "bessel1d", lambda k, cut: tadpole_planar(params, cut=cut)
    if name == "fourpoint_irregular":
        return "reduced3d", lambda k, cut: fourpoint_irregular(k, params, cut)
    if name == "bubble_regular":
        return "reduced3d", lambda k, cut: bubble_regular(k, params, cut)
    if g.loop_count <= 2 and g.N in (2, 4):
        return "schwinger_mc", lambda k, cut: schwinger_mc(g, params, external_momenta(g.N, k), cut,
                                                           n_samples, seed=seed)
    return None


def uv_cutoff(name: str, lam: float) -> CutoffSpec:
    """Hard momentum cutoff for the planar tadpole, Schwinger alpha >= 1/Lambda^2 otherwise."""
    return CutoffSpec(p_uv=lam) if name == "tadpole_planar" else CutoffSpec.uv(lam)


def scan(evaluate: Evaluator, axis: str, grid: Sequence[float], *, k_fixed: float = 1.0,
         name: str = "", params: ModelParams | None = None) -> ScanSeries:
    samples = []
    for x in grid:
        if axis == "k_ir":
            samples.append(evaluate(float(x), CutoffSpec.slice_window(float(x))))
        else:
            samples.append(evaluate(k_fixed, uv_cutoff(name, float(x))))
    return ScanSeries.from_samples(axis, grid, samples, params, name)


def measure_class(name: str, evaluate: Evaluator, params: ModelParams, *,
                  uv_grid: Sequence[float] | None = None,
                  ir_grid: Sequence[float] | None = None) -> tuple[DivergenceClass, str]:
    """Divergent UV growth -> ren.; else a significant dominant c/k^2 -> finite ren.; else convergent."""
    uv_grid = np.logspace(1, 3, 8) if uv_grid is None else uv_grid
    uv = fit_uv_divergence(scan(evaluate, "lambda_uv", uv_grid, name=name, params=params))
    if uv.outcome != "bounded":
        return DivergenceClass.RENORMALIZABLE_DIVERGENT, f"UV {uv.report()}"
    ir_grid = np.logspace(-3, -1, 8) if ir_grid is None else ir_grid
    s = scan(evaluate, "k_ir", ir_grid, name=name, params=params)
    ir = fit_ir_structure(s)
    c, dc = ir.coefficients["c"], ir.stderr["c"]
    k_min = float(s.x.min())
    a_min = abs(s.sorted().values[0].real)
    if abs(c) > 5.0 * dc and abs(c) / k_min ** 2 > 0.5 * a_min:
        return DivergenceClass.FINITE_RENORMALIZATION, f"UV bounded; IR {ir.report()}"
    return DivergenceClass.CONVERGENT, f"UV bounded; IR {ir.report()}"


def reproduce_table(catalog: Iterable[str] | Mapping[str, RibbonGraph] | None = None,
                    params: ModelParams | None = None, *, seed: int = 42,
                    n_samples: int = 1_000_000, uv_grid: Sequence[float] | None = None,
                    ir_grid: Sequence[float] | None = None) -> ClassificationTable:
    """Predicted (topology) versus measured (scans and fits) class for each graph.

    Graphs with N outside {2, 4} and graphs without an evaluator are listed
    as unmeasured; they never count as mismatches.
    """
    params = params or ModelParams()
    if catalog is None:
        catalog = catalog_names()
    graphs = dict(catalog) if isinstance(catalog, Mapping) else {n: catalog_get(n) for n in catalog}
    rows = []
    for name, g in graphs.items():
        rep = topology_report(g)
        predicted = divergence_class(rep)
        ev = evaluator_for(name, g, params, seed=seed, n_samples=n_samples) if rep.N in (2, 4) else None
        if ev is None:
            rows.append(TableRow(name, rep.klass, rep.N, predicted, None, "no evaluator"))
            continue
        method, fn = ev
        try:
            measured, evidence = measure_class(name, fn, params, uv_grid=uv_grid, ir_grid=ir_grid)
        except (QuadratureError, MonteCarloError, DomainError, FitError) as exc:
            rows.append(TableRow(name, rep.klass, rep.N, predicted, None, f"{method} failed: {exc}"))
            continue
        rows.append(TableRow(name, rep.klass, rep.N, predicted, measured, f"{method}; {evidence}"))
    return ClassificationTable(tuple(rows))
