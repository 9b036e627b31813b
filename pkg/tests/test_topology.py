from __future__ import annotations

import pytest
from hypothesis import given

from moyalrg import (DivergenceClass, GraphClass, catalog_get, catalog_names, divergence_class,
                     parse_graph, topology_report, trace_faces)
from moyalrg.topology import classify, superficial_degree_bound
from strategies import brute_force_faces, ribbon_graphs

EXPECTED = {
    # name: (F, g, B, class)
    "tadpole_planar": (2, 0, 1, GraphClass.PLANAR_REGULAR),
    "tadpole_np": (2, 0, 2, GraphClass.PLANAR_IRREGULAR),
    "bubble_regular": (2, 0, 1, GraphClass.PLANAR_REGULAR),
    "fourpoint_irregular": (2, 0, 2, GraphClass.PLANAR_IRREGULAR),
    "sunset_planar": (3, 0, 1, GraphClass.PLANAR_REGULAR),
    "sunset_np": (1, 1, 1, GraphClass.NONPLANAR),
    "figure_eight_np": (1, 1, 0, GraphClass.NONPLANAR),
}


@pytest.mark.parametrize("name", catalog_names())
def test_faces_match_brute_force(name):
    g = catalog_get(name)
    rep = topology_report(g)
    assert brute_force_faces(g) == (rep.F, rep.g, rep.B)
    assert 2 - 2 * rep.g == rep.n - rep.L + rep.F


@pytest.mark.parametrize("name, expected", sorted(EXPECTED.items()))
def test_known_topologies(name, expected):
    rep = topology_report(catalog_get(name))
    assert (rep.F, rep.g, rep.B, rep.klass) == expected


def test_broken_faces_list_legs_in_declaration_order():
    faces = trace_faces(catalog_get("tadpole_planar"))
    labels = [f.external_labels for f in faces if f.broken]
    assert labels == [("k1", "k2")]


def test_bare_vertex_is_one_broken_face():
    g = parse_graph("vertex v: a b c d\nexternal k1: a\nexternal k2: b\nexternal k3: c\nexternal k4: d")
    rep = topology_report(g)
    assert (rep.F, rep.g, rep.B) == (1, 0, 1)


@pytest.mark.parametrize("genus, broken, klass", [
    (0, 0, GraphClass.PLANAR_REGULAR), (0, 1, GraphClass.PLANAR_REGULAR),
    (0, 2, GraphClass.PLANAR_IRREGULAR), (0, 3, GraphClass.PLANAR_IRREGULAR),
    (1, 1, GraphClass.NONPLANAR), (2, 0, GraphClass.NONPLANAR),
])
def test_classify(genus, broken, klass):
    assert classify(genus, broken) is klass


@pytest.mark.parametrize("name, cls", [
    ("tadpole_planar", DivergenceClass.RENORMALIZABLE_DIVERGENT),
    ("bubble_regular", DivergenceClass.RENORMALIZABLE_DIVERGENT),
    ("tadpole_np", DivergenceClass.FINITE_RENORMALIZATION),
    ("fourpoint_irregular", DivergenceClass.CONVERGENT),
    ("sunset_np", DivergenceClass.CONVERGENT),
    ("triangle6", DivergenceClass.CONVERGENT),
])
def test_divergence_class(name, cls):
    assert divergence_class(topology_report(catalog_get(name))) is cls


def test_degree_bound():
    assert superficial_degree_bound(topology_report(catalog_get("tadpole_np"))) == -2
    assert superficial_degree_bound(topology_report(catalog_get("bubble_regular"))) == 0
    assert superficial_degree_bound(topology_report(catalog_get("sunset_np"))) == 6


@given(ribbon_graphs())
def test_random_graphs_match_brute_force(g):
    rep = topology_report(g)
    assert brute_force_faces(g) == (rep.F, rep.g, rep.B)
    assert rep.g >= 0
    assert 2 - 2 * rep.g == rep.n - rep.L + rep.F
    assert rep.B <= rep.F and (rep.B > 0) == (rep.N > 0)
