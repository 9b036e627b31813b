"""Slices of the 1/p^2-modified propagator, high subgraphs, routing and power counting."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .graph import Edge, External, RibbonGraph, Vertex
from .rosette import SpanningTree, _components, spanning_tree
from .topology import topology_report


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    a: float = 1.0
    mu2: float = 1.0
    theta: float = 1.0
    lam: float = 1.0
    M: float = 2.0

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("a must be >= 0")
        if self.mu2 < 0:
            raise ValueError("mu2 must be >= 0")
        if not self.theta > 0:
            raise ValueError("theta must be > 0")
        if not self.M > 1:
            raise ValueError("slice base M must be > 1")

    @property
    def a_eff(self) -> float:
        """Coefficient of 1/p^2 in the denominator."""
        return self.a / self.theta ** 2

    @property
    def d_min(self) -> float:
        """Minimum over p of the propagator denominator."""
        return self.mu2 + 2.0 * math.sqrt(self.a_eff)


def _p2(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim and p.shape[-1] == 4:
        return np.sum(p * p, axis=-1)
    return p * p  # magnitudes


def denominator(p2, params: ModelParams):
    """p^2 + mu^2 + a/(theta^2 p^2) as a function of p^2 (inf at p=0 when a>0)."""
    p2 = np.asarray(p2, dtype=float)
    with np.errstate(divide="ignore"):
        hole = np.where(p2 > 0, params.a_eff / np.where(p2 > 0, p2, 1.0),
                        np.inf if params.a_eff > 0 else 0.0)
    d = p2 + params.mu2 + hole
    if np.any(d == 0):
        raise DomainError("propagator is singular at p=0 when a = mu = 0")
    return d


def propagator(p, params: ModelParams):
    """1/(p^2 + mu^2 + a/(theta^2 p^2)); accepts 4-vectors or magnitudes."""
    out = 1.0 / denominator(_p2(p), params)
    return float(out) if np.ndim(out) == 0 else out


def slice_window(i: int, M: float) -> tuple[float, float]:
    if i < 0:
        raise ValueError("slice index must be >= 0")
    if i == 0:
        return 1.0, math.inf
    return M ** (-2 * i), M ** (-2 * (i - 1))


def slice_propagator(p, i: int, params: ModelParams):
    """Closed form of the Schwinger integral over slice i."""
    d = denominator(_p2(p), params)
    lo, hi = slice_window(i, params.M)
    with np.errstate(invalid="ignore", over="ignore"):
        if i == 0:
            out = np.exp(-d) / d
        else:
            out = np.exp(-lo * d) * -np.expm1(-(hi - lo) * d) / d
    out = np.where(np.isinf(d), 0.0, out)
    return float(out) if np.ndim(out) == 0 else out


def slice_bound(p, i: int, params: ModelParams):
    """M^2 exp(-M^{-2i} D) for i >= 1 and M^2 exp(-p^2) for i = 0."""
    p2 = _p2(p)
    if i == 0:
        out = params.M ** 2 * np.exp(-p2)
    else:
        d = denominator(p2, params)
        out = params.M ** 2 * np.exp(-params.M ** (-2 * i) * d)
    return float(out) if np.ndim(out) == 0 else out


def scale_of_momentum(k, M: float) -> int:
    """Slice index of a momentum: |log_M |k||, rounded half toward zero."""
    mag = float(np.linalg.norm(k)) if np.ndim(k) else abs(float(k))
    if mag == 0:
        raise DomainError("zero momentum has no scale")
    x = abs(math.log(mag) / math.log(M))
    n = math.floor(x)
    return n + 1 if x - n > 0.5 + 1e-12 else n


# ---------------------------------------------------------------- attributions

@dataclass(frozen=True)
class ScaleAttribution:
    scale: Mapping[str, int]

    def __post_init__(self):
        if any(int(s) != s or s < 0 for s in self.scale.values()):
            raise ValueError("scale indices must be nonnegative integers")

    @property
    def max_scale(self) -> int:
        return max(self.scale.values(), default=0)


_SCALE_LINE = re.compile(r"^\s*scale\s+([A-Za-z0-9_]+)\s*:\s*(\d+)\s*$")


def parse_attribution(text: str) -> ScaleAttribution:
    scale = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _SCALE_LINE.match(line)
        if not m:
            raise ValueError(f"line {lineno}: expected 'scale <eid>: <i>'")
        if m.group(1) in scale:
            raise ValueError(f"line {lineno}: duplicate scale for {m.group(1)}")
        scale[m.group(1)] = int(m.group(2))
    return ScaleAttribution(scale)


@dataclass(frozen=True)
class HighSubgraph:
    scale_i: int
    r: int
    edges: tuple[str, ...]
    vertices: frozenset[str]
    N_ext: int
    genus: int = 0
    parent: int | None = None  # index r' of the enclosing component at scale i-1


def subgraph(g: RibbonGraph, edges) -> RibbonGraph:
    """Ribbon graph spanned by ``edges``; every other half-edge becomes a leg."""
    edges = list(edges)
    verts = {v for e in edges for v in g.edge_vertices(e)}
    keep = set()
    for e in edges:
        keep.update(g.edge(e).ends)
    vlist = [v for v in g.vertices if v.id in verts]
    legs = [External(f"leg_{h}", h) for v in vlist for h in v.rotation if h not in keep]
    return RibbonGraph(tuple(Vertex(v.id, v.rotation) for v in vlist),
                       tuple(Edge(e, g.edge(e).ends) for e in edges),
                       tuple(legs))


def high_subgraphs(g: RibbonGraph, att: ScaleAttribution) -> list[HighSubgraph]:
    if set(att.scale) != {e.id for e in g.edges}:
        raise ValueError("attribution must cover exactly the internal lines")
    out: list[HighSubgraph] = []
    prev: list[HighSubgraph] = []
    order = {e.id: i for i, e in enumerate(g.edges)}
    for i in range(att.max_scale + 1):
        high = [e.id for e in g.edges if att.scale[e.id] >= i]
        level = []
        for r, comp in enumerate(sorted(_components(g, high), key=lambda c: min(order[e] for e in c))):
            comp = tuple(sorted(comp, key=order.__getitem__))
            verts = frozenset(v for e in comp for v in g.edge_vertices(e))
            sub = subgraph(g, comp)
            parent = next((p.r for p in prev if set(comp) <= set(p.edges)), None)
            level.append(HighSubgraph(i, r, comp, verts, 4 * len(verts) - 2 * len(comp),
                                      topology_report(sub).g, parent))
        out.extend(level)
        prev = level
    return out


def power_counting_bound(g: RibbonGraph, att: ScaleAttribution) -> int:
    """log_M of the multiscale bound: sum over high subgraphs of -omega.

    Planar components contribute -(N-4); components of positive genus
    -(N+4).
    """
    total = 0
    for h in high_subgraphs(g, att):
        omega = h.N_ext - 4 if h.genus == 0 else h.N_ext + 4
        total -= omega
    return total


# ---------------------------------------------------------------- routing

@dataclass(frozen=True)
class MomentumRouting:
    """Tree momenta as signed combinations of loop and external momenta."""

    tree: SpanningTree
    loop_basis: tuple[str, ...]
    tree_momentum_formula: Mapping[str, Mapping[str, int]] = field(default_factory=dict)

    def coefficients(self, g: RibbonGraph) -> tuple[list[str], np.ndarray, np.ndarray]:
        """Return (lines, C, X) with p_line = C @ loops + X @ externals."""
        lines = [e.id for e in g.edges]
        labels = g.external_labels()
        C = np.zeros((len(lines), len(self.loop_basis)))
        X = np.zeros((len(lines), len(labels)))
        for i, l in enumerate(lines):
            if l in self.loop_basis:
                C[i, self.loop_basis.index(l)] = 1.0
                continue
            for lab, c in self.tree_momentum_formula[l].items():
                if lab in self.loop_basis:
                    C[i, self.loop_basis.index(lab)] += c
                else:
                    X[i, labels.index(lab)] += c
        return lines, C, X


def momentum_routing(g: RibbonGraph, t: SpanningTree | None = None) -> MomentumRouting:
    t = t or spanning_tree(g)
    tree = set(t.tree_lines)
    loops = tuple(e.id for e in g.edges if e.id not in tree)
    formula = {}
    for l in t.tree_lines:
        branch = t.branch[l]
        q: dict[str, int] = {}
        for vid in branch:
            for h in g.vertex(vid).rotation:
                lab = g.external_of(h)
                if lab is not None:
                    q[lab] = q.get(lab, 0) + 1
                    continue
                e = g.edge(g.edge_of(h))
                if e.id in tree:
                    continue
                s = 1 if h == e.ends[1] else -1
                q[e.id] = q.get(e.id, 0) + s
        a, b = g.edge(l).ends
        h_in = a if g.vertex_of(a) in branch else b
        sign_in = 1 if h_in == g.edge(l).ends[1] else -1
        formula[l] = {lab: -sign_in * c for lab, c in q.items() if c}
    return MomentumRouting(t, loops, formula)


def route_momenta(g: RibbonGraph, t: SpanningTree | None, loop_momenta: Mapping[str, np.ndarray],
                  external_momenta) -> dict[str, np.ndarray]:
    """Momentum of every internal line; loop lines keep their free momenta."""
    from .rosette import _check_conservation

    if not isinstance(external_momenta, Mapping):
        external_momenta = dict(zip(g.external_labels(), external_momenta))
    _check_conservation([external_momenta[lab] for lab in g.external_labels()])
    routing = momentum_routing(g, t)
    out = {l: np.asarray(loop_momenta[l], dtype=float) for l in routing.loop_basis}
    for l, combo in routing.tree_momentum_formula.items():
        vec = np.zeros(4)
        for lab, c in combo.items():
            vec += c * np.asarray(loop_momenta[lab] if lab in routing.loop_basis
                                  else external_momenta[lab], dtype=float)
        out[l] = vec
    return out


def vertex_defects(g: RibbonGraph, line_momenta: Mapping[str, np.ndarray],
                   external_momenta: Mapping[str, np.ndarray]) -> dict[str, float]:
    """|sum of incoming momenta| at every vertex."""
    out = {}
    for v in g.vertices:
        tot = np.zeros(4)
        for h in v.rotation:
            lab = g.external_of(h)
            if lab is not None:
                tot += external_momenta[lab]
            else:
                e = g.edge(g.edge_of(h))
                tot += (1.0 if h == e.ends[1] else -1.0) * line_momenta[e.id]
        out[v.id] = float(np.linalg.norm(tot))
    return out
