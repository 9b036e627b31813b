"""Hypothesis strategies and independent oracles shared by the tests."""
from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from moyalrg.graph import Edge, External, RibbonGraph, Vertex


@st.composite
def ribbon_graphs(draw, max_vertices: int = 4, max_externals: int | None = None):
    """Connected quartic ribbon graphs: a random tree plus random extra lines."""
    n = draw(st.integers(1, max_vertices))
    rot = [[f"h{v}_{i}" for i in range(4)] for v in range(n)]
    for r in rot:
        shift = draw(st.integers(0, 3))
        r[:] = r[shift:] + r[:shift]
    free = [list(r) for r in rot]
    pairs = []
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        choices_u = [h for h in free[u]]
        if not choices_u:
            # u is saturated; pick any earlier vertex with a free slot
            u = next(w for w in range(v) if free[w])
            choices_u = free[u]
        a = draw(st.sampled_from(choices_u))
        b = draw(st.sampled_from(free[v]))
        free[u].remove(a)
        free[v].remove(b)
        pairs.append((a, b))
    rest = [h for f in free for h in f]
    rest = draw(st.permutations(rest))
    n_extra = draw(st.integers(0, len(rest) // 2))
    if max_externals is not None:
        n_extra = max(n_extra, (len(rest) - max_externals + 1) // 2)
        n_extra = min(n_extra, len(rest) // 2)
    for i in range(n_extra):
        pairs.append((rest[2 * i], rest[2 * i + 1]))
    legs = rest[2 * n_extra:]
    return RibbonGraph(
        tuple(Vertex(f"v{i}", tuple(r)) for i, r in enumerate(rot)),
        tuple(Edge(f"e{i}", p) for i, p in enumerate(pairs)),
        tuple(External(f"k{i + 1}", h) for i, h in enumerate(legs)),
    )


def brute_force_faces(g: RibbonGraph) -> tuple[int, int, int]:
    """(F, g, B) by walking corners of the graph with every leg capped by a univalent vertex.

    Darts are the half-edges plus one cap dart per leg.  The involution pairs
    the ends of every line and every leg with its cap; faces are the cycles
    of rotation-after-involution.  A pendant leg does not change the face
    count, and a face is broken when its walk passes a cap.
    """
    nxt = {}
    for v in g.vertices:
        r = v.rotation
        for i, h in enumerate(r):
            nxt[h] = r[(i + 1) % len(r)]
    inv = {}
    for e in g.edges:
        inv[e.ends[0]], inv[e.ends[1]] = e.ends[1], e.ends[0]
    caps = set()
    for x in g.externals:
        c = ("cap", x.label)
        caps.add(c)
        inv[x.half_edge], inv[c] = c, x.half_edge
        nxt[c] = c
    seen = set()
    F = B = 0
    for d in nxt:
        if d in seen:
            continue
        F += 1
        broken = False
        while d not in seen:
            seen.add(d)
            broken |= d in caps
            d = nxt[inv[d]]
        B += broken
    chi = (g.n + g.N) - (g.L + g.N) + F
    genus = (2 - chi) // 2
    return F, genus, B


def conserving_momenta(rng: np.random.Generator, N: int, scale: float = 1.0) -> np.ndarray:
    ks = scale * rng.standard_normal((N, 4))
    if N:
        ks[-1] = -ks[:-1].sum(axis=0)
    return ks
