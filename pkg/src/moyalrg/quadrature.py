"""One-dimensional quadrature helpers: Gauss-Legendre panels, Wynn epsilon,
and the four-dimensional radial Fourier transform."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import j1, jn_zeros

from ._gl import gauss_legendre


class QuadratureError(RuntimeError):
    """Raised when an integral fails to converge; carries the partial value."""

    def __init__(self, message: str, value: float = math.nan, abs_err: float = math.inf):
        super().__init__(message)
        self.value = value
        self.abs_err = abs_err


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_err: float
    panels: int


def wynn_epsilon(seq: Sequence[float]) -> tuple[float, float]:
    """Wynn's epsilon acceleration of a sequence of partial sums.

    Returns the last even-column estimate and the difference to the
    previous one as an error indicator.
    """
    s = [float(v) for v in seq]
    n = len(s)
    if n < 3:
        return s[-1], abs(s[-1] - s[-2]) if n == 2 else math.inf
    prev = [0.0] * (n + 1)
    cur = s[:]
    estimates = [s[-1]]
    for k in range(1, n):
        nxt = []
        for i in range(len(cur) - 1):
            d = cur[i + 1] - cur[i]
            if d == 0.0:
                nxt.append(math.inf)
            else:
                nxt.append(prev[i + 1] + 1.0 / d)
        prev, cur = cur, nxt
        if not cur:
            break
        if k % 2 == 0 and math.isfinite(cur[-1]):
            estimates.append(cur[-1])
    if len(estimates) < 2:
        return estimates[-1], abs(s[-1] - s[-2])
    return estimates[-1], abs(estimates[-1] - estimates[-2])


def _panel_rules(kernel, edges: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """n- and 2n-point Gauss-Legendre values on every panel (vectorised)."""
    a, b = edges[:-1], edges[1:]
    half, mid = 0.5 * (b - a), 0.5 * (b + a)
    out = []
    for m in (n, 2 * n):
        x, w = gauss_legendre(m)
        nodes = mid[:, None] + half[:, None] * x
        vals = kernel(nodes.ravel()).reshape(nodes.shape)
        out.append(half * (vals @ w))
    return out[0], out[1]


def integrate_panels(kernel: Callable[[np.ndarray], np.ndarray], edges, *, rtol: float = 1e-10,
                     atol: float = 1e-14, n: int = 10, max_depth: int = 30) -> QuadResult:
    """Composite Gauss-Legendre with bisection of panels whose two rules disagree."""
    edges = np.asarray(edges, dtype=float)
    total, err, count = 0.0, 0.0, 0
    pending = [edges]
    depth = 0
    while pending:
        batch_edges = [e for e in pending]
        pending = []
        for e in batch_edges:
            lo, hi = _panel_rules(kernel, e, n)
            diff = np.abs(hi - lo)
            scale = np.maximum(np.abs(hi), np.abs(lo))
            ok = (diff <= rtol * scale) | (diff <= atol * (e[1:] - e[:-1]) / max(e[-1] - e[0], 1e-300))
            if depth >= max_depth:
                ok[:] = True
            total += float(np.sum(hi[ok]))
            err += float(np.sum(diff[ok]))
            count += int(np.sum(ok))
            for i in np.flatnonzero(~ok):
                pending.append(np.array([e[i], 0.5 * (e[i] + e[i + 1]), e[i + 1]]))
        depth += 1
    return QuadResult(total, err, count)


def radial_fourier_4d(f: Callable[[np.ndarray], np.ndarray], q: float, p_uv: float = math.inf, *,
                      breaks: Sequence[float] = (), rtol: float = 1e-8, atol: float = 1e-12,
                      max_panels: int = 200_000) -> tuple[float, float]:
    """Integral of exp(i q.p) f(|p|) over R^4 (or the ball |p| <= p_uv).

    Uses (4 pi^2/q) int p^2 J1(q p) f(p) dp, or 2 pi^2 int p^3 f(p) dp at
    q = 0.  Panels break at the caller's ``breaks`` and at the zeros of
    J1(q p).  On an infinite domain the integral is continued panel by
    panel until the tail is negligible; slowly decaying oscillatory tails
    are summed with Wynn's epsilon algorithm over the partial sums at the
    Bessel zeros.  Returns (value, abs_err).
    """
    if q < 0:
        raise ValueError("q must be >= 0")
    if not p_uv > 0:
        raise ValueError("p_uv must be > 0")
    if q == 0.0:
        def kernel(p):
            return 2.0 * math.pi ** 2 * p ** 3 * f(p)
    else:
        def kernel(p):
            return (4.0 * math.pi ** 2 / q) * p * p * j1(q * p) * f(p)

    bpts = sorted({float(b) for b in breaks if 0.0 < b < p_uv})
    head_end = bpts[-1] if bpts else (min(p_uv, 1.0) if math.isfinite(p_uv) else 1.0)
    if math.isfinite(p_uv):
        head_end = p_uv

    def zeros_upto(limit: float) -> list[float]:
        if q == 0.0:
            return []
        count = int(limit * q / math.pi) + 2
        if count > max_panels:
            raise QuadratureError("too many oscillations below the cutoff")
        z = jn_zeros(1, count) / q
        return [float(v) for v in z if v < limit]

    edges = np.array(sorted({0.0, head_end, *bpts, *zeros_upto(head_end)}))
    head = integrate_panels(kernel, edges, rtol=rtol * 1e-2, atol=atol * 1e-2)
    if math.isfinite(p_uv):
        return head.value, head.abs_err + 1e-15 * abs(head.value)

    # tail on (head_end, inf)
    total, err = head.value, head.abs_err
    partial = [total]
    start = head_end
    used = head.panels
    quiet = 0
    zero_index = 0
    if q > 0.0:
        zero_index = int(start * q / math.pi) + 1
    batch = 16
    while used < max_panels:
        if q > 0.0:
            z = jn_zeros(1, zero_index + batch)[zero_index:] / q
            z = z[z > start]
            zero_index += batch
            tail_edges = np.concatenate(([start], z))
        else:
            tail_edges = start * 1.25 ** np.arange(0, batch + 1)
        lo, hi = _panel_rules(kernel, tail_edges, 10)
        for i in range(hi.size):
            total += float(hi[i])
            err += float(abs(hi[i] - lo[i]))
            partial.append(total)
            if abs(hi[i]) <= atol + rtol * abs(total) * 1e-2:
                quiet += 1
            else:
                quiet = 0
            if quiet >= 4:
                return total, err + 4 * abs(float(hi[i]))
        used += hi.size
        start = float(tail_edges[-1])
        if q > 0.0 and len(partial) >= 40:
            est, est_err = wynn_epsilon(partial[-40:])
            est2, _ = wynn_epsilon(partial[-41:-1])
            spread = max(est_err, abs(est - est2))
            if spread <= atol + rtol * abs(est):
                return est, err + spread
        batch = min(batch * 2, 4096)
    raise QuadratureError("radial Fourier integral did not converge", total, math.inf)
