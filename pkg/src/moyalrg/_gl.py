"""Gauss-Legendre panel rules shared by both kernel backends."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(edges: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite n-point Gauss-Legendre over ``edges``."""
    x, w = gauss_legendre(n)
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def log_alpha_rule(lo: float, hi: float, n: int, per_decade: float = 2.0,
                   linear_below: float | None = None, n_linear: int | None = None):
    """Quadrature for an integral over alpha in [lo, hi].

    Panels are uniform in log(alpha); when ``linear_below`` is given, the
    range [lo, linear_below] is covered by one panel linear in alpha (used
    when lo = 0).  Weights include the Jacobian.
    """
    nodes, weights = [], []
    start = lo
    if linear_below is not None and linear_below > lo:
        top = min(linear_below, hi)
        x, w = panel_nodes(np.array([lo, top]), n_linear or n)
        nodes.append(x)
        weights.append(w)
        start = top
    if hi > start:
        if start <= 0:
            raise ValueError("log panels need a positive lower bound")
        span = np.log10(hi / start)
        k = max(1, int(np.ceil(span * per_decade - 1e-9)))
        t_edges = np.linspace(np.log(start), np.log(hi), k + 1)
        t, w = panel_nodes(t_edges, n)
        a = np.exp(t)
        nodes.append(a)
        weights.append(w * a)
    return np.concatenate(nodes), np.concatenate(weights)
