#!/usr/bin/env python3
"""
Tests for curves in regular position, cutting and the contractibility tests
"""

from collections import deque

import numpy as np
import pytest

from app.modules.combinatorial_map import classify, dualize, mark_holes
from app.modules.curves import (
    CrossCurve, annulus_equivalent, boundary_curves, boundary_length, cut_curve_system, homology_basis,
    homology_class_z2, interface_curves, is_contractible, is_separating, overlay, reduce_backtracks, z2_rank,
)
from app.modules.fixtures import genus_canonical, k7_double, k7_torus, octahedron, subdivide, tetrahedron
from app.modules.genus_zero import greedy_genus_zero_decomposition
from app.modules.random_surfaces import RandomSurfaceSpec, random_surface
from app.modules.systole import shortest_noncontractible
from app.utils.errors import CurveNotSimple, DegenerateCurve, HasBoundary, InvalidMapError


@pytest.fixture
def torus():
    return dualize(k7_torus())


@pytest.fixture
def systole(torus):
    length, curve = shortest_noncontractible(torus)
    return curve


def face_loop(s, f):
    """Curve around a single face"""
    inside = np.zeros(s.num_faces_total, dtype=bool)
    inside[f] = True
    (curve, followed), = interface_curves(s, inside)
    return curve, followed


def test_reduce_backtracks_cancels_pairs():
    twin = np.array([1, 0, 3, 2])
    assert reduce_backtracks([0, 1, 2], twin) == [2]
    assert reduce_backtracks([0, 2, 3, 1], twin) == []
    # the ends of a closed sequence cancel too
    assert reduce_backtracks([0, 2, 1], twin) == [2]


def test_length_counts_weighted_crossings(torus, systole):
    assert systole.length(torus) == len(systole) == 3
    systole.validate(torus)


def test_backtrack_is_not_simple(torus):
    h = 0
    with pytest.raises(CurveNotSimple):
        CrossCurve((h, int(torus.twin[h]))).validate(torus, face_simple=False)


def test_consecutive_crossings_must_share_a_face(torus):
    face, twin = torus.face, torus.twin
    h = 0
    far = next(k for k in range(torus.num_half_edges)
               if face[twin[k]] != face[h] and k != twin[h])
    with pytest.raises(InvalidMapError):
        CrossCurve((h, far)).validate(torus, face_simple=False)


def test_reversed_curve_is_valid(torus, systole):
    back = systole.reversed(torus)
    back.validate(torus)
    assert back.length(torus) == systole.length(torus)


def test_from_edge_cycle_flips_sides(torus, systole):
    start = int(torus.face[torus.twin[systole.crossings[0]]])
    undirected = [int(min(h, torus.twin[h])) for h in systole.crossings]
    assert CrossCurve.from_edge_cycle(torus, start, undirected) == systole


def test_face_loop_is_contractible_and_separating(torus):
    curve, followed = face_loop(torus, 0)
    # K7 is complete, so the star of a vertex has six distinct neighbours
    assert curve.length(torus) == 6
    assert len(followed) == 6
    assert is_contractible(torus, curve)
    assert is_separating(torus, curve)
    assert not homology_class_z2(torus, curve).any()


def test_systole_is_essential(torus, systole):
    assert not is_contractible(torus, systole)
    assert not is_separating(torus, systole)
    assert homology_class_z2(torus, systole).any()


def test_empty_curve_is_contractible(torus):
    assert is_contractible(torus, CrossCurve(()))


def test_every_curve_on_a_sphere_is_contractible():
    s = dualize(tetrahedron())
    curve, _ = face_loop(s, 0)
    assert is_contractible(s, curve)
    assert is_separating(s, curve)


def test_cutting_a_torus_along_its_systole(torus, systole):
    pieces = cut_curve_system(torus, [systole])
    assert len(pieces) == 1
    piece = pieces[0]
    assert classify(piece.surface).is_annulus
    assert sorted(piece.hole_curves) == [(0,), (0,)]
    assert boundary_length(piece.surface) == 2 * systole.length(torus)


def test_cutting_off_a_face(torus):
    curve, _ = face_loop(torus, 3)
    pieces = cut_curve_system(torus, [curve])
    kinds = sorted((p.surface.genus, p.surface.num_holes) for p in pieces)
    assert kinds == [(0, 1), (1, 1)]


def test_cut_without_curves_keeps_the_surface(torus):
    piece, = cut_curve_system(torus, [])
    assert piece.surface is torus


def test_degenerate_curve_cannot_be_cut(torus):
    with pytest.raises(DegenerateCurve):
        cut_curve_system(torus, [CrossCurve(())])


def test_annulus_pushoffs_match_the_systole(torus, systole):
    annulus = cut_curve_system(torus, [systole])[0].surface
    pushoffs = [curve for curve, _ in boundary_curves(annulus)]
    assert len(pushoffs) == 2
    assert all(curve.length(annulus) == systole.length(torus) for curve in pushoffs)


def face_distances(s, root):
    dist = {root: 0}
    queue = deque([root])
    while queue:
        f = queue.popleft()
        for h in s.face_cycle(f):
            g = int(s.face[s.twin[h]])
            if g not in dist:
                dist[g] = dist[f] + 1
                queue.append(g)
    return dist


@pytest.fixture
def far_holes():
    """Sphere and three faces at pairwise distance at least three"""
    s = dualize(subdivide(subdivide(octahedron())))
    chosen = [0]
    tables = [face_distances(s, 0)]
    for _ in range(2):
        best = max(range(s.num_faces_total), key=lambda f: min(t[f] for t in tables))
        chosen.append(best)
        tables.append(face_distances(s, best))
    assert min(tables[0][chosen[1]], tables[0][chosen[2]], tables[1][chosen[2]]) >= 3
    return s, chosen


def test_parallel_boundary_pushoffs_cobound_an_annulus(far_holes):
    s, chosen = far_holes
    annulus = mark_holes(s, chosen[:2])
    (a, _), (b, _) = boundary_curves(annulus)
    assert annulus_equivalent(annulus, a, b)


def test_pushoffs_of_different_holes_are_not_parallel(far_holes):
    s, chosen = far_holes
    pants = mark_holes(s, chosen)
    (a, _), (b, _), _ = boundary_curves(pants)
    assert not annulus_equivalent(pants, a, b)


def test_boundary_curves_follow_hole_order(far_holes):
    s, chosen = far_holes
    s = mark_holes(s, chosen)
    curves = boundary_curves(s)
    assert len(curves) == 3
    for (curve, followed), f in zip(curves, s.hole_faces()):
        assert int(s.face[s.twin[followed[0]]]) == f
    assert boundary_length(s) == sum(curve.length(s) for curve, _ in curves)


def test_homology_basis_rank():
    s = dualize(genus_canonical(2))
    basis = homology_basis(s)
    assert basis.shape[0] == 4
    assert z2_rank(list(basis)) == 4


def test_homology_needs_closed_surface():
    s = mark_holes(dualize(k7_torus()), [0])
    with pytest.raises(HasBoundary):
        homology_basis(s)


def test_z2_rank():
    assert z2_rank([]) == 0
    assert z2_rank([np.array([1, 0, 1]), np.array([0, 1, 1]), np.array([1, 1, 0])]) == 2


def test_homology_rows_are_cycles():
    s = dualize(genus_canonical(2))
    rep = np.flatnonzero(np.arange(s.num_half_edges) < s.twin)
    for row in homology_basis(s):
        used = rep[row[s.edge_id[rep]] == 1]
        ends = np.concatenate([s.vert[used], s.vert[s.twin[used]]])
        assert not (np.bincount(ends, minlength=s.num_vertices) % 2).any()


def test_capped_homology_of_a_holed_surface():
    s = mark_holes(dualize(k7_double()), [0, 5])
    basis = homology_basis(s, capped=True)
    assert basis.shape == (4, s.num_edges)
    assert z2_rank(list(basis)) == 4


def test_overlay_without_curves_is_the_host(torus):
    system = overlay(torus, [])
    arr = system.arrangement
    assert not system.chord_mask.any()
    assert sorted(system.host_of.tolist()) == list(range(torus.num_half_edges))
    assert (torus.twin[system.host_of] == system.host_of[arr.twin]).all()
    assert (torus.phi[system.host_of] == system.host_of[arr.phi]).all()
    assert system.euler_characteristic == torus.euler_characteristic


@pytest.mark.parametrize('build', [k7_torus, lambda: genus_canonical(2)])
def test_overlay_subdivides_each_crossed_edge(build):
    s = dualize(build())
    _, curve = shortest_noncontractible(s)
    k = len(curve)
    system = overlay(s, [curve])
    arr = system.arrangement
    assert arr.num_vertices == s.num_vertices + k
    assert arr.num_edges == s.num_edges + 2 * k
    assert arr.num_faces_total == s.num_faces_total + k
    assert int(system.chord_mask.sum()) == 2 * k
    assert system.euler_characteristic == s.euler_characteristic


@pytest.mark.parametrize('build', [
    lambda: dualize(k7_double()),
    lambda: dualize(genus_canonical(2)),
    lambda: random_surface(RandomSurfaceSpec(n=20, seed=3, condition='genus-exact', genus=2)),
])
def test_separating_iff_null_homologous(build, tree_curves):
    s = build()
    curves = tree_curves(s, 40, seed=1)
    assert curves
    for curve in curves:
        assert is_separating(s, curve) == (not homology_class_z2(s, curve).any())
        if is_contractible(s, curve):
            assert is_separating(s, curve)


def test_annulus_equivalence_is_symmetric(far_holes):
    s, chosen = far_holes
    annulus = mark_holes(s, chosen[:2])
    (a, _), (b, _) = boundary_curves(annulus)
    assert annulus_equivalent(annulus, a, b) and annulus_equivalent(annulus, b, a)
    pants = mark_holes(s, chosen)
    (a, _), (b, _), _ = boundary_curves(pants)
    assert annulus_equivalent(pants, a, b) == annulus_equivalent(pants, b, a)


def test_curves_of_different_classes_are_not_parallel():
    s = dualize(k7_double())
    first, second = greedy_genus_zero_decomposition(s)
    assert (homology_class_z2(s, first) != homology_class_z2(s, second)).any()
    assert not annulus_equivalent(s, first, second)
    assert not annulus_equivalent(s, second, first)
