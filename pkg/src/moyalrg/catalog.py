"""Named graphs used throughout the tests, the CLI and the classification table."""
from __future__ import annotations

from dataclasses import dataclass

from .graph import RibbonGraph, parse_graph


@dataclass(frozen=True)
class GraphCatalogEntry:
    name: str
    text: str
    notes: str

    @property
    def graph(self) -> RibbonGraph:
        return parse_graph(self.text)


_ENTRIES = [
    GraphCatalogEntry("tadpole_planar", """
vertex v1: h1 h2 h3 h4
edge e1: h1 h2
external k1: h3
external k2: h4
""", "one-loop two-point graph, loop on adjacent corners (single broken face)"),
    GraphCatalogEntry("tadpole_np", """
vertex v1: h1 h2 h3 h4
edge e1: h1 h3
external k1: h2
external k2: h4
""", "non-planar tadpole: genus 0 with two broken faces"),
    GraphCatalogEntry("bubble_regular", """
vertex v1: a1 b1 x1 x2
vertex v2: b2 a2 x3 x4
edge ea: a1 a2
edge eb: b1 b2
external k1: x1
external k2: x2
external k3: x3
external k4: x4
""", "one-loop four-point bubble, planar regular"),
    GraphCatalogEntry("fourpoint_irregular", """
vertex v1: a1 b1 x1 x2
vertex v2: a2 b2 x3 x4
edge ea: a1 a2
edge eb: b1 b2
external k1: x1
external k2: x2
external k3: x3
external k4: x4
""", "one-loop four-point bubble with two broken faces; k1,k2 and k3,k4 share a vertex"),
    GraphCatalogEntry("sunset_planar", """
vertex v1: x1 a1 b1 c1
vertex v2: x2 c2 b2 a2
edge ea: a1 a2
edge eb: b1 b2
edge ec: c1 c2
external k1: x1
external k2: x2
""", "two-loop sunset, planar regular"),
    GraphCatalogEntry("sunset_np", """
vertex v1: x1 a1 b1 c1
vertex v2: x2 a2 b2 c2
edge ea: a1 a2
edge eb: b1 b2
edge ec: c1 c2
external k1: x1
external k2: x2
""", "two-loop sunset with the three lines crossed, genus 1"),
    GraphCatalogEntry("fourpoint_2loop_planar", """
vertex v1: a1 b1 x1 x2
vertex v2: x3 c2 d2 a2
vertex v3: x4 b3 d3 c3
edge ea: a1 a2
edge eb: b1 b3
edge ec: c2 c3
edge ed: d2 d3
external k1: x1
external k2: x2
external k3: x3
external k4: x4
""", "two-loop four-point graph, planar regular"),
    GraphCatalogEntry("fourpoint_np", """
vertex v1: a1 b1 x1 x2
vertex v2: x3 a2 c2 d2
vertex v3: x4 b3 c3 d3
edge ea: a1 a2
edge eb: b1 b3
edge ec: c2 c3
edge ed: d2 d3
external k1: x1
external k2: x2
external k3: x3
external k4: x4
""", "two-loop four-point graph of genus 1"),
    GraphCatalogEntry("figure_eight_np", """
vertex v1: h1 h2 h3 h4
edge e1: h1 h3
edge e2: h2 h4
""", "vacuum graph, two crossing loops on one vertex, genus 1"),
    GraphCatalogEntry("triangle6", """
vertex v1: a1 x1 c1 x2
vertex v2: a2 x3 b2 x4
vertex v3: b3 x5 c3 x6
edge e1: a1 a2
edge e2: b2 b3
edge e3: c1 c3
external k1: x1
external k2: x2
external k3: x3
external k4: x4
external k5: x5
external k6: x6
""", "one-loop six-point triangle; hand-built, used for scale attributions"),
    GraphCatalogEntry("chain_bubble6", """
vertex v1: a1 b1 x1 x2
vertex v2: b2 a2 c2 x3
vertex v3: c3 x4 x5 x6
edge e1: a1 a2
edge e2: b1 b2
edge e3: c2 c3
external k1: x1
external k2: x2
external k3: x3
external k4: x4
external k5: x5
external k6: x6
""", "bubble followed by a tree line to a third vertex; hand-built"),
    GraphCatalogEntry("rosette_example", """
vertex v1: a1 l3a x1 l5a
vertex v2: a2 l3b b2 l5b
vertex v3: b3 x2 l4a l4b
edge 1: a1 a2
edge 2: b2 b3
edge 3: l3a l3b
edge 5: l5a l5b
edge 4: l4a l4b
external k1: x1
external k2: x2
""", "three-vertex two-point graph whose rosette has crossing loop lines 3 and 5"),
]

CATALOG: dict[str, GraphCatalogEntry] = {e.name: e for e in _ENTRIES}


def catalog_names() -> list[str]:
    return list(CATALOG)


def catalog_get(name: str) -> RibbonGraph:
    """Return a freshly parsed copy of the named graph."""
    try:
        entry = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown catalog graph {name!r}; known: {', '.join(CATALOG)}") from None
    return entry.graph
