"""
Combinatorial Map Module
Half-edge representation of graphs cellularly embedded on orientable surfaces,
with holes as marked faces, plus the surgery primitives (gluing, cutting,
splitting into components, duality) every other module builds on.

Conventions:
    twin[h]   the opposite half-edge of the same edge
    nxt[h]    next half-edge around the tail vertex of h
    phi[h]    nxt[twin[h]], the face permutation; the face of h lies to its right
    origin[h] root half-edge id the edge descends from, -1 for edges created by surgery

Author: Surface Lab Team
Version: 1.0.0
"""

import logging
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from app.utils.errors import (
    Disconnected, HasBoundary, InvalidMapError, NegativeGenus, NotInvolution, NotPermutation,
)

logger = logging.getLogger(__name__)


###############################################################################
# ORBIT HELPERS
###############################################################################

def _orbit_labels(perm: np.ndarray) -> Tuple[int, np.ndarray]:
    """Label the orbits of a permutation, numbered by their smallest element"""
    size = len(perm)
    arange = np.arange(size)
    graph = sp.coo_matrix((np.ones(size, dtype=np.int8), (arange, perm)), shape=(size, size)).tocsr()
    count, labels = csgraph.connected_components(graph, directed=True, connection='weak')
    return count, _canonical_labels(count, labels)


def _canonical_labels(count: int, labels: np.ndarray) -> np.ndarray:
    size = len(labels)
    first = np.full(count, size, dtype=np.int64)
    np.minimum.at(first, labels, np.arange(size))
    rank = np.empty(count, dtype=np.int64)
    rank[np.argsort(first, kind='stable')] = np.arange(count)
    return rank[labels]


def _component_labels(twin: np.ndarray, nxt: np.ndarray) -> Tuple[int, np.ndarray]:
    size = len(twin)
    arange = np.arange(size)
    rows = np.concatenate([arange, arange])
    cols = np.concatenate([twin, nxt])
    graph = sp.coo_matrix((np.ones(2 * size, dtype=np.int8), (rows, cols)), shape=(size, size)).tocsr()
    count, labels = csgraph.connected_components(graph, directed=True, connection='weak')
    return count, _canonical_labels(count, labels)


###############################################################################
# COMBINATORIAL MAP
###############################################################################

class CombinatorialMap:
    """Graph cellularly embedded on an orientable surface, possibly with holes.

    Immutable after construction: every surgery returns a new map.
    """

    def __init__(self, twin: Sequence[int], nxt: Sequence[int], hole: Optional[Sequence[bool]] = None,
                 origin: Optional[Sequence[int]] = None, allow_disconnected: bool = False):
        self.twin = np.asarray(twin, dtype=np.int64)
        self.nxt = np.asarray(nxt, dtype=np.int64)
        size = len(self.twin)
        arange = np.arange(size)

        if size == 0 or size % 2 or len(self.nxt) != size:
            raise InvalidMapError(f'twin and next must have the same even, positive length '
                                  f'(got {size} and {len(self.nxt)})')
        if (self.twin < 0).any() or (self.twin >= size).any():
            raise NotInvolution('twin has out-of-range entries')
        if (self.twin == arange).any():
            raise NotInvolution('twin has a fixed point', half_edge=int(np.flatnonzero(self.twin == arange)[0]))
        if (self.twin[self.twin] != arange).any():
            raise NotInvolution('twin is not an involution')
        if (self.nxt < 0).any() or (self.nxt >= size).any() or \
                (np.bincount(self.nxt, minlength=size) != 1).any():
            raise NotPermutation('next is not a permutation')

        self.phi = self.nxt[self.twin]
        self.num_vertices, self.vert = _orbit_labels(self.nxt)
        self.num_faces_total, self.face = _orbit_labels(self.phi)

        hole_mask = np.zeros(size, dtype=bool) if hole is None else np.asarray(hole, dtype=bool)
        if len(hole_mask) != size:
            raise InvalidMapError('hole mask length differs from half-edge count')
        sizes = np.bincount(self.face, minlength=self.num_faces_total)
        marked = np.bincount(self.face, weights=hole_mask, minlength=self.num_faces_total)
        if ((marked > 0) & (marked < sizes)).any():
            raise InvalidMapError('hole flag must be constant along a face')
        self.hole_face = marked == sizes
        self.hole = self.hole_face[self.face]

        self.origin = arange.copy() if origin is None else np.asarray(origin, dtype=np.int64)
        if len(self.origin) != size:
            raise InvalidMapError('origin length differs from half-edge count')

        self.num_components, self.component = _component_labels(self.twin, self.nxt)
        if self.num_components != 1 and not allow_disconnected:
            raise Disconnected(f'map has {self.num_components} components')

        twice_genus = 2 - self._component_euler()
        if (twice_genus < 0).any() or (twice_genus % 2).any():
            raise NegativeGenus('Euler characteristic is inconsistent with an orientable surface')
        self.component_genus = twice_genus // 2
        self._genus = int(self.component_genus.sum())
        self._face_start = None
        self._vertex_start = None
        self._edge_id = None
        self.cache = {}

    ###########################################################################
    # COUNTS
    ###########################################################################

    def _component_euler(self) -> np.ndarray:
        c = self.num_components
        vertex_rep = np.full(self.num_vertices, -1, dtype=np.int64)
        vertex_rep[self.vert] = np.arange(len(self.vert))
        face_rep = np.full(self.num_faces_total, -1, dtype=np.int64)
        face_rep[self.face] = np.arange(len(self.face))
        v = np.bincount(self.component[vertex_rep], minlength=c)
        f = np.bincount(self.component[face_rep], minlength=c)
        e = np.bincount(self.component, minlength=c) // 2
        return v - e + f

    @property
    def num_half_edges(self) -> int:
        return len(self.twin)

    @property
    def num_edges(self) -> int:
        return len(self.twin) // 2

    @property
    def num_holes(self) -> int:
        return int(self.hole_face.sum())

    @property
    def boundary_count(self) -> int:
        return self.num_holes

    @property
    def num_faces(self) -> int:
        """Interior faces only"""
        return self.num_faces_total - self.num_holes

    @property
    def genus(self) -> int:
        """Sum of the genera of the components"""
        return self._genus

    @property
    def euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges + self.num_faces

    @property
    def edge_id(self) -> np.ndarray:
        """Edge index of each half-edge, edges numbered by their smaller half-edge"""
        if self._edge_id is None:
            low = np.minimum(np.arange(self.num_half_edges), self.twin)
            self._edge_id = np.searchsorted(np.unique(low), low)
        return self._edge_id

    @property
    def weight(self) -> np.ndarray:
        """Crossing weight: 1 for edges descending from the root graph, 0 for surgery chords"""
        return (self.origin >= 0).astype(np.int64)

    def vertex_degrees(self) -> np.ndarray:
        return np.bincount(self.vert, minlength=self.num_vertices)

    def face_degrees(self) -> np.ndarray:
        return np.bincount(self.face, minlength=self.num_faces_total)

    def interior_vertex_mask(self) -> np.ndarray:
        touched = np.zeros(self.num_vertices, dtype=bool)
        touched[self.vert[self.hole]] = True
        return ~touched

    @property
    def n(self) -> int:
        """Number of vertices not incident to any hole"""
        return int(self.interior_vertex_mask().sum())

    ###########################################################################
    # FACE TRAVERSAL
    ###########################################################################

    def face_start(self, f: int) -> int:
        if self._face_start is None:
            start = np.full(self.num_faces_total, -1, dtype=np.int64)
            order = np.arange(self.num_half_edges)[::-1]
            start[self.face[order]] = order
            self._face_start = start
        return int(self._face_start[f])

    def face_cycle(self, f: int) -> List[int]:
        """Half-edges of face f in phi order, starting from the smallest"""
        start = self.face_start(f)
        cycle = [start]
        phi = self.phi
        h = int(phi[start])
        while h != start:
            cycle.append(h)
            h = int(phi[h])
        return cycle

    def vertex_cycle(self, v: int) -> List[int]:
        """Half-edges leaving vertex v in rotation order"""
        if self._vertex_start is None:
            start = np.full(self.num_vertices, -1, dtype=np.int64)
            order = np.arange(self.num_half_edges)[::-1]
            start[self.vert[order]] = order
            self._vertex_start = start
        first = int(self._vertex_start[v])
        cycle = [first]
        nxt = self.nxt
        h = int(nxt[first])
        while h != first:
            cycle.append(h)
            h = int(nxt[h])
        return cycle

    def hole_faces(self) -> List[int]:
        return [int(f) for f in np.flatnonzero(self.hole_face)]

    def interior_faces(self) -> List[int]:
        return [int(f) for f in np.flatnonzero(~self.hole_face)]

    ###########################################################################
    # PREDICATES
    ###########################################################################

    def is_trivalent(self) -> bool:
        return bool((self.vertex_degrees() == 3).all())

    def is_triangulation(self) -> bool:
        return bool((self.face_degrees()[~self.hole_face] == 3).all())

    def summary(self) -> Dict[str, int]:
        return {
            'v': self.num_vertices,
            'e': self.num_edges,
            'f': self.num_faces,
            'b': self.num_holes,
            'g': self.genus,
            'chi': self.euler_characteristic,
            'n': self.n,
            'components': self.num_components,
        }

    def __repr__(self) -> str:
        s = self.summary()
        return (f"{self.__class__.__name__}(v={s['v']}, e={s['e']}, f={s['f']}, "
                f"b={s['b']}, g={s['g']})")


class Triangulation(CombinatorialMap):
    """Map whose interior faces are all triangles; n counts the triangles"""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        if not self.is_triangulation():
            raise InvalidMapError('every interior face of a triangulation must have degree 3')

    @property
    def n(self) -> int:
        return self.num_faces


class CrossMetricSurface(CombinatorialMap):
    """Trivalent map G*; curves are measured by the G* edges they cross"""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        degrees = self.vertex_degrees()
        interior = self.interior_vertex_mask()
        if (degrees[interior] != 3).any():
            raise InvalidMapError('interior vertices of a cross-metric surface must have degree 3')


###############################################################################
# CONSTRUCTION
###############################################################################

def _hole_mask_from_representatives(twin: np.ndarray, nxt: np.ndarray, reps: Iterable[int]) -> np.ndarray:
    phi = nxt[twin]
    mask = np.zeros(len(twin), dtype=bool)
    for rep in reps:
        rep = int(rep)
        if rep < 0 or rep >= len(twin):
            raise InvalidMapError(f'boundary face representative {rep} out of range')
        h = rep
        while True:
            mask[h] = True
            h = int(phi[h])
            if h == rep:
                break
    return mask


def build_map(twin: Sequence[int], nxt: Sequence[int], boundary_faces: Iterable[int] = (),
              cls=CombinatorialMap, **kwargs) -> CombinatorialMap:
    """Validated map from twin/next arrays; boundary faces given by one half-edge each"""
    twin_arr = np.asarray(twin, dtype=np.int64)
    nxt_arr = np.asarray(nxt, dtype=np.int64)
    if len(twin_arr) != len(nxt_arr):
        raise InvalidMapError('twin and next must have equal length')
    reps = list(boundary_faces)
    hole = None
    if reps:
        if ((twin_arr < 0) | (twin_arr >= len(twin_arr))).any():
            raise NotInvolution('twin has out-of-range entries')
        if ((nxt_arr < 0) | (nxt_arr >= len(nxt_arr))).any():
            raise NotPermutation('next has out-of-range entries')
        hole = _hole_mask_from_representatives(twin_arr, nxt_arr, reps)
    return cls(twin_arr, nxt_arr, hole=hole, **kwargs)


def from_phi(phi: Sequence[int], twin: Sequence[int], hole: Optional[Sequence[bool]] = None,
             cls=CombinatorialMap, **kwargs) -> CombinatorialMap:
    """Build a map from its face permutation (nxt = phi o twin)"""
    phi_arr = np.asarray(phi, dtype=np.int64)
    twin_arr = np.asarray(twin, dtype=np.int64)
    return cls(twin_arr, phi_arr[twin_arr], hole=hole, **kwargs)


def from_triangles(triangles: Sequence[Tuple[int, int, int]]) -> Triangulation:
    """Triangulation from consistently oriented vertex triples"""
    key_to_half_edge: Dict[Tuple[int, int], int] = {}
    phi = []
    for t, (a, b, c) in enumerate(triangles):
        base = 3 * t
        for i, (u, v) in enumerate(((a, b), (b, c), (c, a))):
            if (u, v) in key_to_half_edge:
                raise InvalidMapError(f'directed edge {u}->{v} used twice; triangles are not consistently oriented')
            key_to_half_edge[(u, v)] = base + i
            phi.append(base + (i + 1) % 3)
    twin = np.empty(len(phi), dtype=np.int64)
    for (u, v), h in key_to_half_edge.items():
        if (v, u) not in key_to_half_edge:
            raise NotInvolution(f'edge {u}->{v} has no opposite; surface is not closed')
        twin[h] = key_to_half_edge[(v, u)]
    return from_phi(phi, twin, cls=Triangulation)


###############################################################################
# DUALITY
###############################################################################

def dualize(t: CombinatorialMap) -> CrossMetricSurface:
    """Dual cross-metric surface: same half-edges, rotation = primal face permutation"""
    if t.num_holes:
        raise HasBoundary('dualize requires a surface without boundary')
    return CrossMetricSurface(t.twin, t.phi, origin=t.origin)


def primal_dual(s: CombinatorialMap) -> Triangulation:
    """Inverse of dualize: the triangulation whose dual is s"""
    if s.num_holes:
        raise HasBoundary('primal_dual requires a surface without boundary')
    return Triangulation(s.twin, s.phi, origin=s.origin)


###############################################################################
# CLASSIFICATION
###############################################################################

class Classification(NamedTuple):
    genus: int
    boundary_count: int
    is_disk: bool
    is_annulus: bool
    is_pants: bool


def classify_counts(genus: int, boundary_count: int) -> Classification:
    return Classification(
        genus=genus,
        boundary_count=boundary_count,
        is_disk=(genus, boundary_count) == (0, 1),
        is_annulus=(genus, boundary_count) == (0, 2),
        is_pants=(genus, boundary_count) == (0, 3),
    )


def classify(m: CombinatorialMap) -> Classification:
    return classify_counts(m.genus, m.num_holes)


###############################################################################
# SURGERY
###############################################################################

def glue_faces(m: CombinatorialMap, keep_face: np.ndarray, cut: Optional[np.ndarray] = None,
               cls=CrossMetricSurface) -> Tuple[CombinatorialMap, np.ndarray]:
    """Glue the kept faces of m back together along every uncut side.

    keep_face is a boolean mask over faces; cut a boolean mask over half-edges
    (symmetric under twin). A side is glued when both of its faces are kept and
    it is not cut; every other side of a kept face becomes free and gets a new
    boundary half-edge, and the new half-edges close up into hole faces.
    Existing holes are not kept and reappear as fresh boundary loops.

    Returns the (possibly disconnected) map and, per new half-edge, the index
    of the half-edge of m it comes from (-1 for new boundary half-edges).
    """
    keep_face = np.asarray(keep_face, dtype=bool) & ~m.hole_face
    cut_mask = np.zeros(m.num_half_edges, dtype=bool) if cut is None else np.asarray(cut, dtype=bool)
    twin = m.twin.tolist()
    phi = m.phi.tolist()
    phi_inv = [0] * len(phi)
    for h, p in enumerate(phi):
        phi_inv[p] = h

    kept = np.flatnonzero(keep_face[m.face])
    kept_list = kept.tolist()
    face_kept = keep_face[m.face]
    glued = face_kept & face_kept[m.twin] & ~cut_mask
    glued_list = glued.tolist()
    free = [h for h in kept_list if not glued_list[h]]

    new_index = {h: i for i, h in enumerate(kept_list)}
    boundary_index = {h: len(kept_list) + i for i, h in enumerate(free)}
    size = len(kept_list) + len(free)
    new_twin = [0] * size
    new_phi = [0] * size
    parent = [-1] * size

    for h in kept_list:
        i = new_index[h]
        parent[i] = h
        new_phi[i] = new_index[phi[h]]
        new_twin[i] = new_index[twin[h]] if glued_list[h] else boundary_index[h]

    limit = len(phi) + 1
    for h in free:
        b = boundary_index[h]
        new_twin[b] = new_index[h]
        q = phi_inv[h]
        steps = 0
        while glued_list[q]:
            q = phi_inv[twin[q]]
            steps += 1
            if steps > limit:
                raise InvalidMapError('boundary walk did not close')
        new_phi[b] = boundary_index[q]

    parent_arr = np.asarray(parent, dtype=np.int64)
    origin = np.where(parent_arr >= 0, m.origin[np.maximum(parent_arr, 0)], -1)
    hole = np.zeros(size, dtype=bool)
    hole[len(kept_list):] = True
    glued_map = from_phi(new_phi, new_twin, hole=hole, origin=origin, cls=cls, allow_disconnected=True)
    return glued_map, parent_arr


def split_components(m: CombinatorialMap, parent: Optional[np.ndarray] = None,
                     cls=None) -> List[Tuple[CombinatorialMap, np.ndarray]]:
    """Split a map into its connected components, each relabeled densely"""
    cls = cls or type(m)
    parent = np.arange(m.num_half_edges) if parent is None else np.asarray(parent, dtype=np.int64)
    pieces = []
    for c in range(m.num_components):
        members = np.flatnonzero(m.component == c)
        relabel = np.full(m.num_half_edges, -1, dtype=np.int64)
        relabel[members] = np.arange(len(members))
        piece = cls(relabel[m.twin[members]], relabel[m.nxt[members]], hole=m.hole[members],
                    origin=m.origin[members])
        pieces.append((piece, parent[members]))
    return pieces


def disjoint_union(maps: Sequence[CombinatorialMap], cls=None) -> CombinatorialMap:
    cls = cls or type(maps[0])
    twins, nxts, holes, origins = [], [], [], []
    offset = 0
    for m in maps:
        twins.append(m.twin + offset)
        nxts.append(m.nxt + offset)
        holes.append(m.hole)
        origins.append(m.origin)
        offset += m.num_half_edges
    return cls(np.concatenate(twins), np.concatenate(nxts), hole=np.concatenate(holes),
               origin=np.concatenate(origins), allow_disconnected=True)


def mark_holes(s: CombinatorialMap, faces: Iterable[int]) -> CombinatorialMap:
    """Turn the given interior faces into holes"""
    hole_face = s.hole_face.copy()
    for f in faces:
        hole_face[int(f)] = True
    return type(s)(s.twin, s.nxt, hole=hole_face[s.face], origin=s.origin,
                   allow_disconnected=s.num_components > 1)


def cut_along(s: CombinatorialMap, curves) -> List['CutComponent']:
    """Cut s along a system of disjoint simple curves; see curves.cut_curve_system"""
    from app.modules.curves import cut_curve_system
    return cut_curve_system(s, curves)


class CutComponent(NamedTuple):
    surface: CombinatorialMap
    parent: np.ndarray  # half-edge of the cut host, -1 for chords and new boundary
    hole_curves: Tuple[Tuple[int, ...], ...] = ()  # per hole face, the curves it is a copy of
