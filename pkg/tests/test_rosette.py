from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from moyalrg import (all_spanning_trees, catalog_get, catalog_names, contract_to_rosette,
                     intersection_matrix, parse_attribution, spanning_tree, topology_report,
                     total_phase)
from moyalrg.multiscale import route_momenta, vertex_defects
from moyalrg.rosette import (ConservationError, is_compatible, moyal_phase_exponent,
                             vertex_product_phase)
from strategies import conserving_momenta, ribbon_graphs


def line_momenta(g, rng, scale=1.0):
    """Momenta for every line and leg, conserved at each vertex."""
    ext = dict(zip(g.external_labels(), conserving_momenta(rng, g.N, scale)))
    t = spanning_tree(g)
    loops = {e.id: scale * rng.standard_normal(4) for e in g.edges if e.id not in t.tree_lines}
    return {**route_momenta(g, t, loops, ext), **ext}


def angle_between(z1, z2):
    return abs(np.angle(z1 / z2))


@pytest.mark.parametrize("name", catalog_names())
def test_rosette_keeps_topology_for_every_tree(name):
    g = catalog_get(name)
    rep = topology_report(g)
    trees = all_spanning_trees(g)
    assert trees
    for t in trees:
        r = contract_to_rosette(g, t)
        rr = topology_report(r.as_ribbon_graph())
        assert (rr.F, rr.g, rr.B) == (rep.F, rep.g, rep.B)
        assert sorted(r.loop_lines) == sorted(e.id for e in g.edges if e.id not in t.tree_lines)
        assert len(r.word) == 2 * len(r.loop_lines) + g.N


@pytest.mark.parametrize("name", catalog_names())
def test_loop_lines_cross_only_in_nonplanar_rosettes(name):
    g = catalog_get(name)
    planar = topology_report(g).g == 0
    for t in all_spanning_trees(g):
        im = intersection_matrix(contract_to_rosette(g, t))
        nl = len(contract_to_rosette(g, t).loop_lines)
        loops = im.I[:nl, :nl]
        assert np.array_equal(im.I, -im.I.T)
        assert (not loops.any()) == planar


def test_intersection_signs():
    r = contract_to_rosette(catalog_get("figure_eight_np"), spanning_tree(catalog_get("figure_eight_np")))
    im = intersection_matrix(r)
    assert str(r) == "( e1 e2 e1 e2 )"
    assert im["e1", "e2"] == 1 and im["e2", "e1"] == -1


@pytest.mark.parametrize("name", ["tadpole_np", "sunset_np", "fourpoint_np", "rosette_example"])
def test_phase_independent_of_tree(name):
    g = catalog_get(name)
    rng = np.random.default_rng(7)
    for _ in range(5):
        mom = line_momenta(g, rng)
        ref = vertex_product_phase(g, mom)
        for t in all_spanning_trees(g):
            assert angle_between(total_phase(g, t, mom), ref) < 1e-12


def test_phase_needs_conservation():
    g = catalog_get("tadpole_np")
    r = contract_to_rosette(g, spanning_tree(g))
    bad = {"e1": np.ones(4), "k1": np.ones(4), "k2": np.zeros(4)}
    with pytest.raises(ConservationError):
        moyal_phase_exponent(r, bad)


def test_compatible_tree_follows_attribution():
    g = catalog_get("fourpoint_2loop_planar")
    att = parse_attribution("\n".join(f"scale {e.id}: {i % 2 + 1}" for i, e in enumerate(g.edges)))
    assert is_compatible(g, spanning_tree(g, att), att)


@given(ribbon_graphs(max_vertices=3), st.integers(0, 2 ** 32 - 1))
def test_random_graphs_filk_and_phase(g, seed):
    rep = topology_report(g)
    rng = np.random.default_rng(seed)
    mom = line_momenta(g, rng)
    ext = {lab: mom[lab] for lab in g.external_labels()}
    assert max(vertex_defects(g, mom, ext).values(), default=0.0) < 1e-9
    ref = vertex_product_phase(g, mom)
    for t in all_spanning_trees(g):
        r = contract_to_rosette(g, t)
        rr = topology_report(r.as_ribbon_graph())
        assert (rr.F, rr.g, rr.B) == (rep.F, rep.g, rep.B)
        assert angle_between(total_phase(g, t, mom), ref) < 1e-9
