#!/usr/bin/env python3
"""
Tests for genus-zero pants decompositions and their multiplicity
"""

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse import csgraph

from app.modules.combinatorial_map import dualize, mark_holes
from app.modules.fixtures import genus_zero_with_holes, k7_double, k7_torus, tetrahedron
from app.modules.genus_zero import (
    boundary_tree, complete_genus_zero, genus_zero_row, greedy_genus_zero_decomposition, multiplicity,
    multiplicity_bound, pairing_decomposition, pairing_rounds, verify_pants,
)
from app.utils.errors import NotGenusZeroDecomposition, TooFewBoundaries, WrongGenus


def test_multiplicity_bound_values():
    assert multiplicity_bound(2) == 16
    assert multiplicity_bound(8) == 32
    assert multiplicity_bound(9) == 40
    assert multiplicity_bound(256) == 72


@pytest.mark.parametrize('b', [3, 4, 5, 6, 8, 11, 16])
def test_pairing_decomposition(b):
    s = genus_zero_with_holes(b, seed=b)
    assert s.genus == 0
    assert s.num_holes == b
    curves = pairing_decomposition(s)
    assert len(curves) == b - 3
    if curves:
        assert verify_pants(s, curves) == b - 2
    assert multiplicity(s, curves) <= multiplicity_bound(b)


def test_boundary_tree_touches_every_hole_once():
    s = genus_zero_with_holes(10, seed=3)
    bt = boundary_tree(s)
    assert sorted(bt.order) == s.hole_faces()
    touches = [f for kind, f in bt.events if kind == 'touch']
    assert touches == bt.order
    assert bt.tree_multiplicity(s) >= 0
    assert bt.path_multiplicity(s) <= 2 * max(bt.tree_multiplicity(s), 1)


@pytest.mark.parametrize('b, seed', [(5, 1), (10, 3), (16, 0)])
def test_boundary_tree_is_a_tree_through_the_ports(b, seed):
    s = genus_zero_with_holes(b, seed=seed)
    bt = boundary_tree(s)
    ports = {int(s.face[h]) for h in bt.ports.values()}
    if not bt.tree_edges:
        assert len(ports) == 1
        return
    rep_of = {int(s.edge_id[h]): h for h in range(s.num_half_edges) if h < s.twin[h]}
    ends = [(int(s.face[rep_of[e]]), int(s.face[s.twin[rep_of[e]]])) for e in bt.tree_edges]
    faces = sorted({f for pair in ends for f in pair})
    assert ports <= set(faces)
    assert len(faces) == len(bt.tree_edges) + 1
    assert not s.hole_face[faces].any()
    index = {f: i for i, f in enumerate(faces)}
    rows, cols = zip(*[(index[u], index[v]) for u, v in ends])
    graph = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(faces), len(faces)))
    assert csgraph.connected_components(graph, directed=False)[0] == 1


def test_pairing_rounds_are_logarithmic():
    s = genus_zero_with_holes(16, seed=0)
    result = pairing_rounds(s)
    assert result.rounds <= 4
    assert len(result.groups) == len(result.curves) == 13


def test_wrong_genus():
    s = mark_holes(dualize(k7_torus()), [0, 1, 2])
    with pytest.raises(WrongGenus):
        pairing_decomposition(s)


def test_too_few_boundaries():
    s = genus_zero_with_holes(2, seed=0)
    with pytest.raises(TooFewBoundaries):
        pairing_decomposition(s)


def test_row_columns():
    row = genus_zero_row(genus_zero_with_holes(6, seed=1))
    assert list(row) == ['b', 'n', 'multiplicity', 'total_length', 'time_ms']
    assert row['b'] == 6


def test_complete_rejects_a_non_decomposition():
    s = dualize(k7_double())
    with pytest.raises(NotGenusZeroDecomposition):
        complete_genus_zero(s, [])


def test_greedy_then_complete_on_double_torus():
    s = dualize(k7_double())
    gamma = greedy_genus_zero_decomposition(s)
    assert len(gamma) == 2
    curves = complete_genus_zero(s, gamma)
    assert len(curves) == 3
    assert verify_pants(s, curves) == 2


def test_sphere_needs_no_curves():
    s = dualize(tetrahedron())
    assert greedy_genus_zero_decomposition(s) == []


@pytest.mark.slow
@pytest.mark.parametrize('b', [32, 64, 128])
def test_multiplicity_stays_logarithmic(b):
    s = genus_zero_with_holes(b, seed=7)
    curves = pairing_decomposition(s)
    assert len(curves) == b - 3
    assert multiplicity(s, curves) <= multiplicity_bound(b)
