"""Faces, genus and broken faces of a ribbon graph.

Faces are those of the amputated graph: external half-edges are deleted
from the rotations before tracing. A face is broken when an external leg
sits in one of its corners. With ``sigma`` the amputated rotation and
``alpha`` the line involution, faces are the cycles of ``sigma . alpha``;
the corner between ``h`` and ``sigma(h)`` belongs to the face through
``sigma(h)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .graph import RibbonGraph


class GraphClass(str, Enum):
    PLANAR_REGULAR = "planar_regular"
    PLANAR_IRREGULAR = "planar_irregular"
    NONPLANAR = "nonplanar"


class DivergenceClass(str, Enum):
    RENORMALIZABLE_DIVERGENT = "renormalizable_divergent"
    FINITE_RENORMALIZATION = "finite_renormalization"
    CONVERGENT = "convergent"


class TopologyError(RuntimeError):
    """Face tracing produced an inconsistent Euler characteristic."""


@dataclass(frozen=True)
class Face:
    cycle: tuple[str, ...]
    external_labels: tuple[str, ...]

    @property
    def broken(self) -> bool:
        return bool(self.external_labels)


@dataclass(frozen=True)
class TopologyReport:
    n: int
    N: int
    L: int
    F: int
    g: int
    B: int
    klass: GraphClass

    def line(self) -> str:
        return (f"n={self.n} N={self.N} L={self.L} F={self.F} "
                f"g={self.g} B={self.B} {self.klass.value}")


def amputated_rotation(g: RibbonGraph) -> dict[str, str]:
    """sigma: internal half-edge -> next internal half-edge counterclockwise."""
    sigma = {}
    for v in g.vertices:
        internal = [h for h in v.rotation if g.edge_of(h) is not None]
        for i, h in enumerate(internal):
            sigma[h] = internal[(i + 1) % len(internal)]
    return sigma


def trace_faces(g: RibbonGraph) -> list[Face]:
    sigma = amputated_rotation(g)
    if not sigma:
        # no internal lines: a single vertex disk
        return [Face((), tuple(g.external_labels()))]
    face_of: dict[str, int] = {}
    cycles: list[list[str]] = []
    for v in g.vertices:
        for h in v.rotation:
            if h not in sigma or h in face_of:
                continue
            cyc = []
            x = h
            while x not in face_of:
                face_of[x] = len(cycles)
                cyc.append(x)
                x = sigma[g.partner(x)]
            cycles.append(cyc)
    labels: list[list[str]] = [[] for _ in cycles]
    for v in g.vertices:
        rot = v.rotation
        m = len(rot)
        for i, h in enumerate(rot):
            if h not in sigma:
                continue
            j = (i + 1) % m
            while rot[j] not in sigma:
                labels[face_of[sigma[h]]].append(g.external_of(rot[j]))
                j = (j + 1) % m
    order = {lab: i for i, lab in enumerate(g.external_labels())}
    return [Face(tuple(c), tuple(sorted(lab, key=order.__getitem__)))
            for c, lab in zip(cycles, labels)]


def classify(genus: int, broken: int) -> GraphClass:
    if genus > 0:
        return GraphClass.NONPLANAR
    return GraphClass.PLANAR_REGULAR if broken <= 1 else GraphClass.PLANAR_IRREGULAR


def topology_report(g: RibbonGraph) -> TopologyReport:
    faces = trace_faces(g)
    F = len(faces)
    B = sum(f.broken for f in faces)
    chi = g.n - g.L + F
    if chi > 2 or chi % 2:
        raise TopologyError(f"Euler relation gives non-integer or negative genus (n-L+F={chi})")
    genus = (2 - chi) // 2
    return TopologyReport(g.n, g.N, g.L, F, genus, B, classify(genus, B))


def superficial_degree_bound(rep: TopologyReport) -> int:
    """Lower bound on the superficial degree of convergence."""
    return rep.N - 4 if rep.g == 0 else rep.N + 4


def divergence_class(rep: TopologyReport) -> DivergenceClass:
    if rep.klass is GraphClass.NONPLANAR or rep.N not in (2, 4):
        return DivergenceClass.CONVERGENT
    if rep.klass is GraphClass.PLANAR_REGULAR:
        return DivergenceClass.RENORMALIZABLE_DIVERGENT
    if rep.N == 2:
        return DivergenceClass.FINITE_RENORMALIZATION
    return DivergenceClass.CONVERGENT
