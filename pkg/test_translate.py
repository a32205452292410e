#!/usr/bin/env python3
"""
Tests for moving curves between G* and the primal triangulation
"""

import pytest

from app.modules.combinatorial_map import dualize
from app.modules.curves import CrossCurve, homology_class_z2, is_contractible
from app.modules.fixtures import genus_canonical, grid_torus, k7_double, k7_torus
from app.modules.systole import shortest_noncontractible, shortest_nonseparating
from app.modules.translate import (
    EQUILATERAL_SIDE, equilateral_length, primal_edge_width, snap_to_primal, walk_to_curve,
)
from app.utils.errors import DegenerateCurve


@pytest.mark.parametrize('build', [k7_torus, lambda: grid_torus(4, 5), lambda: genus_canonical(2)])
def test_snapped_systole_keeps_length_and_class(build):
    t = build()
    s = dualize(t)
    length, curve = shortest_noncontractible(s)
    walk = snap_to_primal(t, curve, s)
    walk.validate(t)
    assert 0 < len(walk) <= 2 * length
    assert (homology_class_z2(s, walk) == homology_class_z2(s, curve)).all()


def test_snap_builds_the_dual_when_missing():
    t = k7_torus()
    _, curve = shortest_nonseparating(dualize(t))
    assert len(snap_to_primal(t, curve)) == 3


def test_walk_shadow_is_the_original_curve():
    t = k7_torus()
    s = dualize(t)
    _, curve = shortest_noncontractible(s)
    walk = snap_to_primal(t, curve, s)
    back = walk_to_curve(t, walk)
    assert back.length(s) == len(walk)
    assert not is_contractible(s, back)


def test_empty_curve_cannot_be_snapped():
    with pytest.raises(DegenerateCurve):
        snap_to_primal(k7_torus(), CrossCurve(()))


def test_equilateral_length():
    # a unit-area equilateral triangle has side 2 / 3^(1/4)
    assert EQUILATERAL_SIDE == pytest.approx(1.5197, abs=1e-4)
    assert float(equilateral_length(3)) == pytest.approx(3 * EQUILATERAL_SIDE)


def test_primal_edge_width():
    length, walk = primal_edge_width(k7_torus())
    assert length == len(walk) == 3
    assert primal_edge_width(grid_torus(3, 5))[0] == 3


@pytest.mark.parametrize('build, seed', [
    (k7_torus, 0), (lambda: grid_torus(4, 5), 1), (lambda: genus_canonical(2), 2), (k7_double, 3),
])
def test_snapping_random_curves(build, seed, tree_curves):
    t = build()
    s = dualize(t)
    curves = tree_curves(s, 50, seed=seed)
    assert len(curves) == 50
    for curve in curves:
        walk = snap_to_primal(t, curve, s)
        if len(walk):
            walk.validate(t)
        assert len(walk) <= 2 * curve.length(s)
        assert (homology_class_z2(s, walk) == homology_class_z2(s, curve)).all()
        if not is_contractible(s, curve):
            assert len(walk) > 0
