"""Spanning trees, Filk contraction to a rosette, intersection matrix and phases.

Momentum conventions
--------------------
Every internal line carries a momentum ``p_e`` oriented from ``ends[0]`` to
``ends[1]``: it enters the graph vertex at ``ends[1]`` as ``+p_e`` and at
``ends[0]`` as ``-p_e``.  External momenta are incoming.  A vertex with
incoming momenta ``q_1..q_4`` in counterclockwise order contributes
``exp((i/2) sum_{i<j} q_i ^ q_j)``.

In the rosette each loop line is represented by the incoming momentum at
its first occurrence in the (linearised) word.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .graph import RibbonGraph, Vertex
from .moyal import vertex_kernel_exponent, wedge


class ConservationError(ValueError):
    """External momenta do not sum to zero."""


@dataclass(frozen=True)
class SpanningTree:
    tree_lines: tuple[str, ...]
    root: str
    parent: Mapping[str, tuple[str, str] | None]  # vertex -> (line, parent vertex)
    depth: Mapping[str, int]
    branch: Mapping[str, frozenset[str]]

    @property
    def order(self) -> list[str]:
        """Tree lines by increasing distance from the root."""
        child = {line: v for v, pl in self.parent.items() if pl for line in [pl[0]]}
        return sorted(self.tree_lines, key=lambda l: (self.depth[child[l]], self.tree_lines.index(l)))


def _scale_map(attribution) -> Mapping[str, int] | None:
    if attribution is None:
        return None
    return getattr(attribution, "scale", attribution)


def _tree_from_lines(g: RibbonGraph, lines, root: str) -> SpanningTree:
    adj: dict[str, list[tuple[str, str]]] = {v.id: [] for v in g.vertices}
    for l in lines:
        a, b = g.edge_vertices(l)
        adj[a].append((l, b))
        adj[b].append((l, a))
    parent: dict[str, tuple[str, str] | None] = {root: None}
    depth = {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for l, w in adj[v]:
            if w not in parent:
                parent[w] = (l, v)
                depth[w] = depth[v] + 1
                queue.append(w)
    if len(parent) != g.n:
        raise ValueError("lines do not span the graph")
    children: dict[str, list[str]] = {v: [] for v in parent}
    for v, pl in parent.items():
        if pl:
            children[pl[1]].append(v)

    def below(v):
        out = {v}
        for c in children[v]:
            out |= below(c)
        return out

    branch = {pl[0]: frozenset(below(v)) for v, pl in parent.items() if pl}
    return SpanningTree(tuple(lines), root, parent, depth, branch)


def spanning_tree(g: RibbonGraph, attribution=None) -> SpanningTree:
    """Kruskal spanning tree, highest scale first, declaration order breaking ties.

    Taking lines in decreasing scale makes the tree restrict to a spanning
    tree of every connected component of the lines with scale >= i.
    """
    scales = _scale_map(attribution)
    index = {e.id: i for i, e in enumerate(g.edges)}
    if scales is not None:
        if set(scales) != set(index):
            raise ValueError("attribution must cover exactly the internal lines")
        ordered = sorted(index, key=lambda e: (-scales[e], index[e]))
    else:
        ordered = list(index)
    comp = {v.id: v.id for v in g.vertices}

    def find(x):
        while comp[x] != x:
            comp[x] = comp[comp[x]]
            x = comp[x]
        return x

    chosen = []
    for e in ordered:
        a, b = (find(x) for x in g.edge_vertices(e))
        if a != b:
            comp[a] = b
            chosen.append(e)
    chosen.sort(key=index.__getitem__)
    return _tree_from_lines(g, chosen, g.root)


def all_spanning_trees(g: RibbonGraph) -> list[SpanningTree]:
    """Every spanning tree, by brute force over line subsets."""
    candidates = [e.id for e in g.edges if len(set(g.edge_vertices(e.id))) == 2]
    trees = []
    for combo in itertools.combinations(candidates, g.n - 1):
        try:
            trees.append(_tree_from_lines(g, combo, g.root))
        except ValueError:
            continue
    return trees


def is_compatible(g: RibbonGraph, t: SpanningTree, attribution) -> bool:
    """True when the tree restricts to a spanning tree of every high subgraph."""
    scales = _scale_map(attribution)
    tree = set(t.tree_lines)
    for i in sorted(set(scales.values())):
        high = [e for e, s in scales.items() if s >= i]
        for comp_lines in _components(g, high):
            verts = {v for e in comp_lines for v in g.edge_vertices(e)}
            inner = [e for e in comp_lines if e in tree]
            if len(inner) != len(verts) - 1 or len(_components(g, inner, verts)) != 1:
                return False
    return True


def _components(g: RibbonGraph, lines, vertices=None) -> list[list[str]]:
    """Connected components of the subgraph spanned by ``lines`` (as line lists)."""
    comp = {}

    def find(x):
        while comp[x] != x:
            comp[x] = comp[comp[x]]
            x = comp[x]
        return x

    for e in lines:
        for v in g.edge_vertices(e):
            comp.setdefault(v, v)
    for v in vertices or ():
        comp.setdefault(v, v)
    for e in lines:
        a, b = (find(v) for v in g.edge_vertices(e))
        if a != b:
            comp[a] = b
    groups: dict[str, list[str]] = {}
    for e in lines:
        groups.setdefault(find(g.edge_vertices(e)[0]), []).append(e)
    if vertices is not None:
        roots = {find(v) for v in vertices}
        return [groups.get(r, []) for r in roots]
    return list(groups.values())


@dataclass(frozen=True)
class Rosette:
    """Single vertex left after contracting a spanning tree.

    ``word`` lists half-edges counterclockwise; ``labels`` gives the line
    (edge id or external label) at each position and ``signs`` the
    orientation of the incoming line momentum there (+1/-1, +1 for legs).
    """

    word: tuple[str, ...]
    labels: tuple[str, ...]
    signs: tuple[int, ...]
    loop_lines: tuple[str, ...]
    externals: tuple[str, ...]

    @property
    def loop_pairs(self) -> dict[str, tuple[int, int]]:
        pos: dict[str, list[int]] = {}
        for i, lab in enumerate(self.labels):
            if lab in self.loop_lines:
                pos.setdefault(lab, []).append(i)
        return {l: (pos[l][0], pos[l][1]) for l in self.loop_lines}

    @property
    def external_positions(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels) if lab in self.externals}

    def __str__(self) -> str:
        return "( " + " ".join(self.labels) + " )"

    def as_ribbon_graph(self) -> RibbonGraph:
        """The rosette as a one-vertex ribbon graph (valence 2*loops + N)."""
        from .graph import Edge, External

        pairs = self.loop_pairs
        return RibbonGraph(
            vertices=(Vertex("rosette", self.word),),
            edges=tuple(Edge(l, (self.word[i], self.word[j])) for l, (i, j) in pairs.items()),
            externals=tuple(External(lab, self.word[i])
                            for lab, i in sorted(self.external_positions.items(),
                                                 key=lambda kv: self.externals.index(kv[0]))),
            root="rosette",
        )


def contract_to_rosette(g: RibbonGraph, t: SpanningTree) -> Rosette:
    word = list(g.vertex(t.root).rotation)
    merged = {t.root}
    for line in t.order:
        a, b = g.edge(line).ends
        if g.vertex_of(a) in merged:
            inner, outer = a, b
        else:
            inner, outer = b, a
        v = g.vertex(g.vertex_of(outer))
        rot = list(v.rotation)
        j = rot.index(outer)
        idx = word.index(inner)
        word[idx:idx + 1] = rot[j + 1:] + rot[:j]
        merged.add(v.id)
    labels, signs = [], []
    for h in word:
        lab = g.external_of(h)
        if lab is not None:
            labels.append(lab)
            signs.append(1)
        else:
            e = g.edge(g.edge_of(h))
            labels.append(e.id)
            signs.append(1 if h == e.ends[1] else -1)
    tree = set(t.tree_lines)
    loops = tuple(e.id for e in g.edges if e.id not in tree)
    return Rosette(tuple(word), tuple(labels), tuple(signs), loops, tuple(g.external_labels()))


@dataclass(frozen=True)
class IntersectionMatrix:
    lines: tuple[str, ...]
    I: np.ndarray

    def __getitem__(self, key):
        i, j = key
        return int(self.I[self.lines.index(i), self.lines.index(j)])


def intersection_matrix(r: Rosette) -> IntersectionMatrix:
    """Signed crossing matrix over loop lines then external legs.

    Entry (i, j) is +1 when j crosses i from the right, -1 from the left,
    0 when they do not cross.  Reading the word from position 0: loop m
    crosses loop l from the right when the pattern is l m l m; a leg
    crosses loop l from the right when it sits between the two ends of l;
    legs i < j (label order) cross when j precedes i in the word, giving
    -1 at (i, j).
    """
    lines = r.loop_lines + r.externals
    idx = {l: i for i, l in enumerate(lines)}
    I = np.zeros((len(lines), len(lines)), dtype=np.int8)
    pairs = r.loop_pairs
    ext_pos = r.external_positions
    for l, (s, t) in pairs.items():
        for m, (u, w) in pairs.items():
            if l != m and s < u < t < w:
                I[idx[l], idx[m]] = 1
                I[idx[m], idx[l]] = -1
        for e, pos in ext_pos.items():
            if s < pos < t:
                I[idx[l], idx[e]] = 1
                I[idx[e], idx[l]] = -1
    for a, b in itertools.combinations(r.externals, 2):
        if ext_pos[b] < ext_pos[a]:
            I[idx[a], idx[b]] = -1
            I[idx[b], idx[a]] = 1
    return IntersectionMatrix(lines, I)


def _check_conservation(ks, tol: float = 1e-9) -> float:
    ks = np.asarray(ks, dtype=float).reshape(-1, 4)
    if len(ks) == 0:
        return 0.0
    defect = float(np.linalg.norm(ks.sum(axis=0)))
    scale = max(1.0, float(np.max(np.linalg.norm(ks, axis=1))))
    if defect > tol * scale:
        raise ConservationError(f"external momenta violate conservation by {defect:.3e}")
    return defect


def rosette_line_vectors(r: Rosette, momenta: Mapping[str, np.ndarray]) -> np.ndarray:
    """Momenta of the rosette lines (loop lines at their first occurrence, then legs)."""
    first_sign = {}
    for lab, s in zip(r.labels, r.signs):
        first_sign.setdefault(lab, s)
    vecs = [first_sign[l] * np.asarray(momenta[l], dtype=float) for l in r.loop_lines]
    vecs += [np.asarray(momenta[e], dtype=float) for e in r.externals]
    return np.array(vecs, dtype=float).reshape(-1, 4)


def moyal_phase_exponent(r: Rosette, momenta: Mapping[str, np.ndarray], theta: float = 1.0,
                         imat: IntersectionMatrix | None = None) -> float:
    """(1/2) sum_ij I_ij x_i ^ x_j for the rosette lines."""
    _check_conservation([momenta[e] for e in r.externals])
    imat = imat or intersection_matrix(r)
    x = rosette_line_vectors(r, momenta)
    W = wedge(x[:, None, :], x[None, :, :], theta)
    return 0.5 * float(np.sum(imat.I * W))


def moyal_phase(r: Rosette, momenta: Mapping[str, np.ndarray], theta: float = 1.0) -> complex:
    return complex(np.exp(1j * moyal_phase_exponent(r, momenta, theta)))


def external_kernel(ks, theta: float = 1.0) -> tuple[float, complex]:
    """Conservation defect |sum k| and the Moyal kernel phase of the legs."""
    ks = np.asarray(ks, dtype=float).reshape(-1, 4)
    defect = float(np.linalg.norm(ks.sum(axis=0)))
    return defect, complex(np.exp(0.5j * vertex_kernel_exponent(ks, theta)))


def total_phase(g: RibbonGraph, t: SpanningTree, momenta: Mapping[str, np.ndarray],
                theta: float = 1.0) -> complex:
    """Rosette phase times the external kernel (labels in declaration order)."""
    r = contract_to_rosette(g, t)
    _, ext = external_kernel([momenta[e] for e in r.externals], theta)
    return ext * moyal_phase(r, momenta, theta)


def vertex_product_phase(g: RibbonGraph, momenta: Mapping[str, np.ndarray],
                         theta: float = 1.0) -> complex:
    """Product of the Moyal vertex kernels, computed vertex by vertex."""
    exponent = 0.0
    for v in g.vertices:
        incoming = []
        for h in v.rotation:
            lab = g.external_of(h)
            if lab is not None:
                incoming.append(momenta[lab])
            else:
                e = g.edge(g.edge_of(h))
                sign = 1.0 if h == e.ends[1] else -1.0
                incoming.append(sign * np.asarray(momenta[e.id], dtype=float))
        exponent += 0.5 * vertex_kernel_exponent(incoming, theta)
    return complex(np.exp(1j * exponent))
