"""
Fixture Surfaces
Deterministic triangulations used by the gen command and throughout the tests.
"""

import re
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.modules.combinatorial_map import (
    CombinatorialMap, CrossMetricSurface, Triangulation, dualize, from_phi, from_triangles, mark_holes,
)
from app.utils.errors import InvalidMapError, UnknownFixture

logger = logging.getLogger(__name__)

FIXTURE_NAMES = frozenset({
    'tetrahedron', 'octahedron', 'k7-torus', 'grid-torus', 'genus-canonical', 'k7-double',
})


def tetrahedron() -> Triangulation:
    return from_triangles([(0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2)])


def octahedron() -> Triangulation:
    return from_triangles([
        (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 1),
        (5, 2, 1), (5, 3, 2), (5, 4, 3), (5, 1, 4),
    ])


def k7_torus() -> Triangulation:
    """The 7-vertex torus: every pair of vertices is joined by an edge"""
    triangles = []
    for i in range(7):
        triangles.append((i, (i + 1) % 7, (i + 3) % 7))
        triangles.append((i, (i + 3) % 7, (i + 2) % 7))
    return from_triangles(triangles)


def grid_torus(width: int, height: int) -> Triangulation:
    if width < 3 or height < 3:
        raise InvalidMapError('grid torus needs width and height of at least 3')

    def vid(i, j):
        return (i % width) + width * (j % height)

    triangles = []
    for j in range(height):
        for i in range(width):
            triangles.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))
            triangles.append((vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)))
    return from_triangles(triangles)


def genus_canonical(genus: int) -> Triangulation:
    """Triangulated 4g-gon with the sides identified along a1 b1 a1^-1 b1^-1 ... ag bg ag^-1 bg^-1.

    Corners p_j, an inner ring r_j and a center c; v = 4g + 2 and 12g triangles.
    """
    if genus < 1:
        raise InvalidMapError('canonical polygon needs genus at least 1')
    sides = 4 * genus
    p = list(range(sides))
    r = [sides + j for j in range(sides)]
    c = 2 * sides

    triangles = []
    for j in range(sides):
        k = (j + 1) % sides
        triangles.append((p[j], p[k], r[j]))
        triangles.append((p[k], r[k], r[j]))
        triangles.append((c, r[j], r[k]))

    # side j is the directed edge p_j -> p_{j+1}, which is half-edge 9j of the first triangle
    glue = []
    for block in range(genus):
        base = 4 * block
        glue.append((9 * base, 9 * (base + 2)))
        glue.append((9 * (base + 1), 9 * (base + 3)))
    return _assemble(triangles, glue)


def _assemble(triangles: Sequence[Tuple[int, int, int]], glue: Sequence[Tuple[int, int]]) -> Triangulation:
    """Oriented triangles whose unmatched directed edges are paired explicitly"""
    by_key = {}
    phi = []
    for t, (a, b, c) in enumerate(triangles):
        for i, key in enumerate(((a, b), (b, c), (c, a))):
            by_key[key] = 3 * t + i
            phi.append(3 * t + (i + 1) % 3)
    twin = np.full(len(phi), -1, dtype=np.int64)
    for (u, v), h in by_key.items():
        if (v, u) in by_key:
            twin[h] = by_key[(v, u)]
    for h1, h2 in glue:
        twin[h1] = h2
        twin[h2] = h1
    if (twin < 0).any():
        raise InvalidMapError('unpaired sides remain after gluing')
    return from_phi(phi, twin, cls=Triangulation)


###############################################################################
# DERIVED FIXTURES
###############################################################################

def subdivide(t: CombinatorialMap) -> Triangulation:
    """Midpoint subdivision: every triangle becomes four"""
    if t.num_holes:
        raise InvalidMapError('subdivision expects a closed triangulation')
    half = t.num_half_edges
    twin = t.twin.tolist()
    faces = [t.face_cycle(f) for f in range(t.num_faces_total)]
    size = 2 * half + 6 * len(faces)
    new_twin = [0] * size
    new_phi = [0] * size

    for h in range(half):
        # A(h) = 2h is the first half of h, B(h) = 2h + 1 the second
        new_twin[2 * h] = 2 * twin[h] + 1
        new_twin[2 * h + 1] = 2 * twin[h]

    for fi, cycle in enumerate(faces):
        if len(cycle) != 3:
            raise InvalidMapError('subdivision expects triangles')
        base = 2 * half + 6 * fi
        x = [base + i for i in range(3)]
        y = [base + 3 + i for i in range(3)]
        for i in range(3):
            prev_h, h = cycle[i - 1], cycle[i]
            a_in, a_out = 2 * prev_h + 1, 2 * h
            new_phi[a_in] = a_out
            new_phi[a_out] = x[i]
            new_phi[x[i]] = a_in
            new_twin[x[i]] = y[i]
            new_twin[y[i]] = x[i]
        new_phi[y[1]] = y[2]
        new_phi[y[2]] = y[0]
        new_phi[y[0]] = y[1]
    return from_phi(new_phi, new_twin, cls=Triangulation)


def connected_sum(a: CombinatorialMap, b: CombinatorialMap) -> Triangulation:
    """Remove one triangle from each surface and glue the two triangular holes"""
    t = a.face_cycle(0)
    s = b.face_cycle(0)
    offset = a.num_half_edges
    removed = set(t) | {h + offset for h in s}
    twin = np.concatenate([a.twin, b.twin + offset]).tolist()
    phi = np.concatenate([a.phi, b.phi + offset]).tolist()

    for ta, sb in ((t[0], s[0]), (t[1], s[2]), (t[2], s[1])):
        x, y = twin[ta], twin[sb + offset]
        twin[x], twin[y] = y, x

    keep = [h for h in range(len(phi)) if h not in removed]
    relabel = {h: i for i, h in enumerate(keep)}
    new_twin = [relabel[twin[h]] for h in keep]
    new_phi = [relabel[phi[h]] for h in keep]
    return from_phi(new_phi, new_twin, cls=Triangulation)


def k7_double() -> Triangulation:
    """Two K7 tori glued along a triangle: genus 2, v = 11, 26 triangles"""
    return connected_sum(k7_torus(), k7_torus())


def genus_zero_with_holes(boundary_count: int, seed: int = 0,
                          level: Optional[int] = None) -> CrossMetricSurface:
    """Dual of a subdivided octahedron with pairwise non-adjacent faces turned into holes"""
    if boundary_count < 1:
        raise InvalidMapError('need at least one hole')
    if level is None:
        level = 0
        while 4 * 4 ** level + 2 < 8 * boundary_count:
            level += 1
    t = octahedron()
    for _ in range(level):
        t = subdivide(t)
    s = dualize(t)

    rng = np.random.Generator(np.random.Philox(seed))
    order = rng.permutation(s.num_faces_total)
    blocked = np.zeros(s.num_faces_total, dtype=bool)
    chosen: List[int] = []
    face, twin = s.face, s.twin
    for f in order.tolist():
        if blocked[f]:
            continue
        chosen.append(f)
        blocked[f] = True
        cycle = s.face_cycle(f)
        blocked[face[twin[cycle]]] = True
        if len(chosen) == boundary_count:
            break
    if len(chosen) < boundary_count:
        raise InvalidMapError(f'could not place {boundary_count} holes at level {level}')
    return mark_holes(s, sorted(chosen))


###############################################################################
# NAMED FIXTURES
###############################################################################

_GRID_RE = re.compile(r'^grid-torus\((\d+),\s*(\d+)\)$')
_GENUS_RE = re.compile(r'^genus\((\d+)\)-canonical$')


def named_fixture(name: str) -> Triangulation:
    """Resolve a gen-command fixture name to its triangulation"""
    name = name.strip().lower()
    if name == 'tetrahedron':
        return tetrahedron()
    if name == 'octahedron':
        return octahedron()
    if name == 'k7-torus':
        return k7_torus()
    if name == 'k7-double':
        return k7_double()
    match = _GRID_RE.match(name)
    if match:
        return grid_torus(int(match.group(1)), int(match.group(2)))
    match = _GENUS_RE.match(name)
    if match:
        return genus_canonical(int(match.group(1)))
    raise UnknownFixture(f'unknown fixture: {name}', known=sorted(FIXTURE_NAMES))
