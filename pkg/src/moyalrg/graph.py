"""Ribbon graphs for the quartic Moyal model.

A graph is a rotation system: every vertex lists its four half-edges in
counterclockwise order, internal lines pair half-edges, and external legs
are single half-edges whose declaration order fixes the momentum labels
k1, k2, ...
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

_IDENT = re.compile(r"[A-Za-z0-9_]+\Z")


class GraphError(ValueError):
    """Raised for malformed or invalid graph input."""


class GraphSyntaxError(GraphError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Vertex:
    id: str
    rotation: tuple[str, ...]


@dataclass(frozen=True)
class Edge:
    """Internal line; momentum is oriented from ``ends[0]`` to ``ends[1]``."""

    id: str
    ends: tuple[str, str]


@dataclass(frozen=True)
class External:
    label: str
    half_edge: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class RibbonGraph:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    externals: tuple[External, ...]
    root: str | None = None
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        root = self.root
        if root is None:
            root = self._default_root()
            object.__setattr__(self, "root", root)

    def _default_root(self) -> str | None:
        if not self.vertices:
            return None
        if self.externals:
            h = self.externals[0].half_edge
            for v in self.vertices:
                if h in v.rotation:
                    return v.id
        return self.vertices[0].id

    # counts
    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def L(self) -> int:
        return len(self.edges)

    @property
    def N(self) -> int:
        return len(self.externals)

    @property
    def loop_count(self) -> int:
        return self.L - self.n + 1

    # lookups, built lazily; the graph itself never changes
    def _lookup(self) -> dict:
        if self._index is None:
            vertex_of = {}
            for v in self.vertices:
                for h in v.rotation:
                    vertex_of.setdefault(h, v.id)
            edge_of = {}
            for e in self.edges:
                for h in e.ends:
                    edge_of.setdefault(h, e.id)
            ext_of = {x.half_edge: x.label for x in self.externals}
            object.__setattr__(self, "_index", {
                "vertex_of": vertex_of,
                "edge_of": edge_of,
                "ext_of": ext_of,
                "vertex": {v.id: v for v in self.vertices},
                "edge": {e.id: e for e in self.edges},
            })
        return self._index

    def vertex(self, vid: str) -> Vertex:
        return self._lookup()["vertex"][vid]

    def edge(self, eid: str) -> Edge:
        return self._lookup()["edge"][eid]

    def vertex_of(self, h: str) -> str:
        return self._lookup()["vertex_of"][h]

    def edge_of(self, h: str) -> str | None:
        return self._lookup()["edge_of"].get(h)

    def external_of(self, h: str) -> str | None:
        return self._lookup()["ext_of"].get(h)

    def partner(self, h: str) -> str:
        e = self.edge(self.edge_of(h))
        return e.ends[1] if e.ends[0] == h else e.ends[0]

    def edge_vertices(self, eid: str) -> tuple[str, str]:
        a, b = self.edge(eid).ends
        return self.vertex_of(a), self.vertex_of(b)

    def external_labels(self) -> list[str]:
        return [x.label for x in self.externals]

    def renamed(self, half_edges: dict[str, str] | None = None,
                vertices: dict[str, str] | None = None) -> "RibbonGraph":
        """Copy with half-edges and/or vertices renamed."""
        hm = half_edges or {}
        vm = vertices or {}
        h = lambda x: hm.get(x, x)  # noqa: E731
        return RibbonGraph(
            vertices=tuple(Vertex(vm.get(v.id, v.id), tuple(h(x) for x in v.rotation))
                           for v in self.vertices),
            edges=tuple(Edge(e.id, (h(e.ends[0]), h(e.ends[1]))) for e in self.edges),
            externals=tuple(External(x.label, h(x.half_edge)) for x in self.externals),
            root=vm.get(self.root, self.root),
        )


def validate(g: RibbonGraph) -> ValidationReport:
    """Check every structural invariant; never raises."""
    problems: list[str] = []
    if not g.vertices:
        problems.append("graph has no vertices")
    seen_vertex: dict[str, int] = {}
    for v in g.vertices:
        if v.id in seen_vertex:
            problems.append(f"duplicate vertex id {v.id}")
        seen_vertex[v.id] = 1
        if len(v.rotation) != 4:
            problems.append(f"vertex {v.id} has valence {len(v.rotation)}, expected 4")
    on_vertex: dict[str, int] = {}
    for v in g.vertices:
        for h in v.rotation:
            on_vertex[h] = on_vertex.get(h, 0) + 1
    on_line: dict[str, int] = {}
    for e in g.edges:
        if e.ends[0] == e.ends[1]:
            problems.append(f"edge {e.id} joins half-edge {e.ends[0]} to itself")
        for h in e.ends:
            on_line[h] = on_line.get(h, 0) + 1
    for x in g.externals:
        on_line[x.half_edge] = on_line.get(x.half_edge, 0) + 1
    for h, c in sorted(on_vertex.items()):
        if c > 1:
            problems.append(f"half-edge {h} appears {c} times in vertex rotations")
        if h not in on_line:
            problems.append(f"dangling half-edge {h}")
    for h, c in sorted(on_line.items()):
        if c > 1:
            problems.append(f"half-edge {h} used {c} times by edges/externals")
        if h not in on_vertex:
            problems.append(f"half-edge {h} is not attached to any vertex")
    for kind, ids in (("edge", [e.id for e in g.edges]), ("external", [x.label for x in g.externals])):
        if len(set(ids)) != len(ids):
            problems.append(f"duplicate {kind} id")
    clash = {e.id for e in g.edges} & {x.label for x in g.externals}
    if clash:
        problems.append(f"ids used both as edge and external label: {sorted(clash)}")
    if 2 * g.L != 4 * g.n - g.N:
        problems.append(f"L != (4n-N)/2: L={g.L}, n={g.n}, N={g.N}")
    if g.root is not None and g.root not in seen_vertex:
        problems.append(f"root {g.root} is not a vertex")
    if not problems and not _connected(g):
        problems.append("graph is disconnected")
    return ValidationReport(tuple(problems))


def _connected(g: RibbonGraph) -> bool:
    adj: dict[str, set[str]] = {v.id: set() for v in g.vertices}
    for e in g.edges:
        a, b = g.edge_vertices(e.id)
        adj[a].add(b)
        adj[b].add(a)
    start = g.vertices[0].id
    seen = {start}
    stack = [start]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == g.n


def check(g: RibbonGraph) -> RibbonGraph:
    report = validate(g)
    if not report:
        raise GraphError("; ".join(report.violations))
    return g


def parse_graph(text: str) -> RibbonGraph:
    """Parse the line-oriented graph format and validate the result.

    ::

        vertex v1: h1 h2 h3 h4
        edge e1: h1 h3
        external k1: h2
        external k2: h4
        root: v1
    """
    vertices: list[Vertex] = []
    edges: list[Edge] = []
    externals: list[External] = []
    root = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        head, sep, rest = line.partition(":")
        if not sep:
            raise GraphSyntaxError("expected ':'", lineno, col)
        head_tokens = head.split()
        tokens = rest.split()
        for t in head_tokens + tokens:
            if not _IDENT.match(t):
                raise GraphSyntaxError(f"bad identifier {t!r}", lineno, line.find(t) + 1)
        kw = head_tokens[0] if head_tokens else ""
        if kw == "root":
            if len(head_tokens) != 1 or len(tokens) != 1:
                raise GraphSyntaxError("expected 'root: <vid>'", lineno, col)
            root = tokens[0]
            continue
        if len(head_tokens) != 2:
            raise GraphSyntaxError(f"expected '<keyword> <id>:' but got {head.strip()!r}", lineno, col)
        name = head_tokens[1]
        if kw == "vertex":
            vertices.append(Vertex(name, tuple(tokens)))
        elif kw == "edge":
            if len(tokens) != 2:
                raise GraphSyntaxError(f"edge {name} needs exactly 2 half-edges", lineno, col)
            edges.append(Edge(name, (tokens[0], tokens[1])))
        elif kw == "external":
            if len(tokens) != 1:
                raise GraphSyntaxError(f"external {name} needs exactly 1 half-edge", lineno, col)
            externals.append(External(name, tokens[0]))
        else:
            raise GraphSyntaxError(f"unknown keyword {kw!r}", lineno, col)
    return check(RibbonGraph(tuple(vertices), tuple(edges), tuple(externals), root))


def serialize_graph(g: RibbonGraph) -> str:
    lines = [f"vertex {v.id}: {' '.join(v.rotation)}" for v in g.vertices]
    lines += [f"edge {e.id}: {e.ends[0]} {e.ends[1]}" for e in g.edges]
    lines += [f"external {x.label}: {x.half_edge}" for x in g.externals]
    if g.root is not None:
        lines.append(f"root: {g.root}")
    return "\n".join(lines) + "\n"


def canonical_form(g: RibbonGraph) -> tuple:
    """Structure of ``g`` with half-edge names forgotten.

    Half-edges are replaced by (vertex id, slot index) relative to each
    rotation as written, so two graphs differing only in half-edge names
    compare equal.
    """
    pos = {}
    for v in g.vertices:
        for i, h in enumerate(v.rotation):
            pos[h] = (v.id, i)
    verts = tuple((v.id, len(v.rotation)) for v in g.vertices)
    edges = tuple((e.id, pos[e.ends[0]], pos[e.ends[1]]) for e in g.edges)
    exts = tuple((x.label, pos[x.half_edge]) for x in g.externals)
    return verts, edges, exts, g.root
