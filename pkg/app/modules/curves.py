"""
Curves Module
Closed curves in regular position on cross-metric surfaces, closed walks in
the primal graph, and the overlay arrangement used to cut along curve systems.

A CrossCurve is the cyclic sequence of half-edges it enters: crossing h moves
the curve from face(twin[h]) into face(h). Lengths count crossings of edges
that descend from the root graph (weight 1); surgery chords weigh nothing.

Author: Surface Lab Team
Version: 1.0.0
"""

import logging
from collections import defaultdict, deque
from dataclasses import dataclass
from functools import cmp_to_key
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from app.modules.combinatorial_map import (
    CombinatorialMap, CrossMetricSurface, CutComponent, from_phi, glue_faces, split_components,
)
from app.utils.errors import (
    CurveNotSimple, CurvesNotDisjoint, DegenerateCurve, HasBoundary, IllegalIntersection, InvalidMapError,
)

logger = logging.getLogger(__name__)


###############################################################################
# CURVE TYPES
###############################################################################

@dataclass(frozen=True)
class CrossCurve:
    """Closed curve in regular position, stored as the half-edges it enters"""

    crossings: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'crossings', tuple(int(h) for h in self.crossings))

    def __len__(self) -> int:
        return len(self.crossings)

    def length(self, s: CombinatorialMap) -> int:
        if not self.crossings:
            return 0
        return int(s.weight[list(self.crossings)].sum())

    def faces(self, s: CombinatorialMap) -> List[int]:
        return [int(s.face[h]) for h in self.crossings]

    def reversed(self, s: CombinatorialMap) -> 'CrossCurve':
        twin = s.twin
        return CrossCurve(tuple(int(twin[h]) for h in reversed(self.crossings)))

    def edge_counts(self, s: CombinatorialMap) -> np.ndarray:
        counts = np.zeros(s.num_edges, dtype=np.int64)
        if self.crossings:
            np.add.at(counts, s.edge_id[list(self.crossings)], 1)
        return counts

    def validate(self, s: CombinatorialMap, face_simple: bool = True) -> None:
        """Check regular position on s; face-simple curves visit each face at most once"""
        face, twin, hole = s.face, s.twin, s.hole
        k = len(self.crossings)
        for i, h in enumerate(self.crossings):
            if h < 0 or h >= s.num_half_edges:
                raise InvalidMapError(f'crossing {h} out of range')
            if hole[h] or hole[twin[h]]:
                raise CurveNotSimple('curve enters a hole', crossing=h)
            following = self.crossings[(i + 1) % k]
            if face[twin[following]] != face[h]:
                raise InvalidMapError('consecutive crossings do not share a face', index=i)
            if following == twin[h]:
                raise CurveNotSimple('curve backtracks across an edge', index=i)
        if face_simple:
            faces = self.faces(s)
            if len(set(faces)) != len(faces):
                raise CurveNotSimple('curve visits a face more than once')

    @staticmethod
    def from_edge_cycle(s: CombinatorialMap, start_face: int, half_edges: Sequence[int]) -> 'CrossCurve':
        """Curve following a closed walk in the face-adjacency graph.

        half_edges are G* half-edges crossed in order; each is flipped, if
        needed, so that it lies in the face being entered.
        """
        face, twin = s.face, s.twin
        current = start_face
        crossings = []
        for h in half_edges:
            h = int(h)
            if face[twin[h]] != current:
                h = int(twin[h])
            if face[twin[h]] != current:
                raise InvalidMapError('edge is not incident to the current face')
            crossings.append(h)
            current = int(face[h])
        if current != start_face:
            raise InvalidMapError('edge walk is not closed')
        return CrossCurve(tuple(crossings))


@dataclass(frozen=True)
class PrimalWalk:
    """Closed walk in the primal graph G, as directed half-edges"""

    edges: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'edges', tuple(int(h) for h in self.edges))

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def length(self) -> int:
        return len(self.edges)

    def validate(self, t: CombinatorialMap) -> None:
        vert, twin = t.vert, t.twin
        for i, h in enumerate(self.edges):
            following = self.edges[(i + 1) % len(self.edges)]
            if vert[twin[h]] != vert[following]:
                raise InvalidMapError('walk is not closed at step', index=i)

    def edge_counts(self, t: CombinatorialMap) -> np.ndarray:
        counts = np.zeros(t.num_edges, dtype=np.int64)
        if self.edges:
            np.add.at(counts, t.edge_id[list(self.edges)], 1)
        return counts

    def vertices(self, t: CombinatorialMap) -> List[int]:
        return [int(t.vert[h]) for h in self.edges]


def reduce_backtracks(sequence: Sequence[int], twin: np.ndarray) -> List[int]:
    """Cancel every h followed by twin(h), cyclically, until nothing cancels"""
    stack: List[int] = []
    for h in sequence:
        h = int(h)
        if stack and twin[stack[-1]] == h:
            stack.pop()
        else:
            stack.append(h)
    # the sequence is closed, so its two ends may cancel as well
    lo, hi = 0, len(stack) - 1
    while lo < hi and twin[stack[hi]] == stack[lo]:
        lo += 1
        hi -= 1
    return stack[lo:hi + 1]


def interface_curves(m: CombinatorialMap, inside_face: np.ndarray) -> List[Tuple[CrossCurve, List[int]]]:
    """Boundary curves of a tubular neighbourhood of the inside faces.

    inside_face is a mask over faces (holes should be marked inside). Each
    curve runs through the outside faces along the interface, with the
    outside to its right; it is returned with the interface half-edges it
    follows (half-edges h with face(h) outside and face(twin h) inside).
    """
    inside = np.asarray(inside_face, dtype=bool)
    face = m.face.tolist()
    twin = m.twin.tolist()
    phi = m.phi.tolist()
    ins = inside.tolist()
    interface = [h for h in range(len(face)) if not ins[face[h]] and ins[face[twin[h]]]]
    seen = set()
    curves = []
    for start in interface:
        if start in seen:
            continue
        crossings = []
        followed = []
        h = start
        while True:
            seen.add(h)
            followed.append(h)
            k = phi[h]
            while not ins[face[twin[k]]]:
                crossings.append(twin[k])
                k = phi[twin[k]]
            h = k
            if h == start:
                break
        curves.append((CrossCurve(tuple(crossings)), followed))
    return curves


def boundary_curves(m: CombinatorialMap) -> List[Tuple[CrossCurve, List[int]]]:
    """Pushoffs of the holes of m, one per hole face, in hole-face order"""
    by_start = {}
    for curve, followed in interface_curves(m, m.hole_face):
        by_start[int(m.face[m.twin[followed[0]]])] = (curve, followed)
    return [by_start[f] for f in m.hole_faces() if f in by_start]


def boundary_length(m: CombinatorialMap) -> int:
    return sum(curve.length(m) for curve, _ in interface_curves(m, m.hole_face))


###############################################################################
# OVERLAY ARRANGEMENT
###############################################################################

class CurveSystem:
    """Overlay of disjoint simple curves with the host graph.

    Every crossed host edge is subdivided at its crossing points and every
    piece of curve inside a face becomes a chord. host_of maps arrangement
    half-edges back to the host (-1 for chords), chord_curve names the curve
    a chord belongs to (-1 for host segments).
    """

    def __init__(self, host: CombinatorialMap, curves: Sequence[CrossCurve], arrangement: CombinatorialMap,
                 host_of: np.ndarray, chord_curve: np.ndarray):
        self.host = host
        self.curves = list(curves)
        self.arrangement = arrangement
        self.host_of = host_of
        self.chord_curve = chord_curve

    @property
    def chord_mask(self) -> np.ndarray:
        return self.chord_curve >= 0

    @property
    def euler_characteristic(self) -> int:
        return self.arrangement.euler_characteristic

    def cut(self) -> List[CutComponent]:
        arr = self.arrangement
        cls = CrossMetricSurface if isinstance(self.host, CrossMetricSurface) else CombinatorialMap
        glued, parent = glue_faces(arr, ~arr.hole_face, cut=self.chord_mask, cls=cls)
        components = []
        for surface, par in split_components(glued, parent, cls=cls):
            host_parent = np.where(par >= 0, self.host_of[np.maximum(par, 0)], -1)
            labels = []
            for f in surface.hole_faces():
                ids = set()
                for b in surface.face_cycle(f):
                    side = par[surface.twin[b]]
                    if side >= 0 and self.chord_curve[side] >= 0:
                        ids.add(int(self.chord_curve[side]))
                labels.append(tuple(sorted(ids)))
            components.append(CutComponent(surface, host_parent, tuple(labels)))
        return components


def _face_positions(s: CombinatorialMap) -> Tuple[List[int], List[int]]:
    position = [0] * s.num_half_edges
    degree = s.face_degrees().tolist()
    for f in range(s.num_faces_total):
        for k, h in enumerate(s.face_cycle(f)):
            position[h] = k
    return position, degree


def overlay(s: CombinatorialMap, curves: Sequence[CrossCurve]) -> CurveSystem:
    """Arrangement of simple, pairwise disjoint curves with the graph of s"""
    curves = list(curves)
    for c in curves:
        if not c.crossings:
            raise DegenerateCurve('cannot overlay a curve without crossings')
        c.validate(s, face_simple=False)

    twin = s.twin.tolist()
    phi = s.phi.tolist()
    face = s.face.tolist()
    position, degree = _face_positions(s)
    seqs = [c.crossings for c in curves]

    # strands grouped by the reference half-edge of the crossed edge
    strands: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
    for i, seq in enumerate(seqs):
        for j, h in enumerate(seq):
            strands[min(h, twin[h])].append((i, j))

    def walk(i, j, r):
        """Exit offsets of strand (i, j) followed into face(r)"""
        seq = seqs[i]
        k = len(seq)
        forward = seq[j] == r
        e = r
        idx = j
        for _ in range(2 * k + 2):
            if forward:
                nxt_entry = seq[(idx + 1) % k]
                exit_side = twin[nxt_entry]
                idx = (idx + 1) % k
            else:
                exit_side = seq[(idx - 1) % k]
                nxt_entry = twin[exit_side]
                idx = (idx - 1) % k
            yield (position[exit_side] - position[e]) % degree[face[e]]
            e = nxt_entry

    def compare(a, b, r):
        ia, ja = a
        ib, jb = b
        steps = len(seqs[ia]) + len(seqs[ib])
        for count, (ka, kb) in enumerate(zip(walk(ia, ja, r), walk(ib, jb, r))):
            if ka != kb:
                return -1 if ka > kb else 1
            if count >= steps:
                break
        # parallel strands: the lower curve id lies first along the half-edge it enters
        low, high = (a, b) if a < b else (b, a)
        low_first = seqs[low[0]][low[1]] == r
        first = low if low_first else high
        return -1 if first == a else 1

    point_rank: Dict[Tuple[int, int], int] = {}
    edge_points: Dict[int, int] = {}
    for r, lst in strands.items():
        if len(lst) > 1:
            lst.sort(key=cmp_to_key(lambda a, b, r=r: compare(a, b, r)))
        edge_points[r] = len(lst)
        for rank, p in enumerate(lst, start=1):
            point_rank[p] = rank

    def points_on(h):
        r = min(h, twin[h])
        return edge_points.get(r, 0)

    def pos_on(h, p):
        r = min(h, twin[h])
        rank = point_rank[p]
        return rank if h == r else edge_points[r] - rank + 1

    seg_base = [0] * len(twin)
    total = 0
    for h in range(len(twin)):
        seg_base[h] = total
        total += points_on(h) + 1
    chord_base = total
    chord_start: Dict[Tuple[int, int], int] = {}
    for i, seq in enumerate(seqs):
        for j in range(len(seq)):
            chord_start[(i, j)] = total
            total += 2

    new_twin = [0] * total
    new_phi = [0] * total
    host_of = np.full(total, -1, dtype=np.int64)
    chord_curve = np.full(total, -1, dtype=np.int64)

    # point at position q (1-based) along host half-edge h
    def point_at(h, q):
        r = min(h, twin[h])
        m = edge_points[r]
        rank = q if h == r else m - q + 1
        return strands[r][rank - 1]

    def chord_leaving_into(h, p):
        """Chord inside face(h) leaving the crossing point p that lies on h"""
        i, j = p
        if seqs[i][j] == h:
            return chord_start[(i, j)]
        return chord_start[(i, (j - 1) % len(seqs[i]))] + 1

    for h in range(len(twin)):
        m = points_on(h)
        base = seg_base[h]
        for k in range(m + 1):
            a = base + k
            host_of[a] = h
            new_twin[a] = seg_base[twin[h]] + (m - k)
            if k < m:
                new_phi[a] = chord_leaving_into(h, point_at(h, k + 1))
            else:
                new_phi[a] = seg_base[phi[h]]

    for i, seq in enumerate(seqs):
        k = len(seq)
        for j in range(k):
            c = chord_start[(i, j)]
            entry = seq[j]
            exit_side = twin[seq[(j + 1) % k]]
            new_twin[c], new_twin[c + 1] = c + 1, c
            new_phi[c] = seg_base[exit_side] + pos_on(exit_side, (i, (j + 1) % k))
            new_phi[c + 1] = seg_base[entry] + pos_on(entry, (i, j))
            chord_curve[c] = chord_curve[c + 1] = i

    _check_nesting(s, seqs, strands, edge_points, point_at, points_on, twin)

    hole = np.zeros(total, dtype=bool)
    seg = host_of >= 0
    hole[seg] = s.hole[host_of[seg]]
    origin = np.where(seg, s.origin[np.maximum(host_of, 0)], -1)
    arrangement = from_phi(new_phi, new_twin, hole=hole, origin=origin, cls=CombinatorialMap,
                           allow_disconnected=s.num_components > 1)
    if arrangement.genus != s.genus or arrangement.euler_characteristic - arrangement.num_holes != \
            s.euler_characteristic - s.num_holes:
        raise IllegalIntersection('arrangement topology differs from the host surface')
    logger.debug(f"Overlay of {len(curves)} curves: {total - chord_base} chord half-edges")
    return CurveSystem(s, curves, arrangement, host_of, chord_curve)


def _check_nesting(s, seqs, strands, edge_points, point_at, points_on, twin) -> None:
    """Chords inside each face must be pairwise non-crossing"""
    busy_faces = set()
    face = s.face
    for r in strands:
        busy_faces.add(int(face[r]))
        busy_faces.add(int(face[twin[r]]))
    for f in sorted(busy_faces):
        stack = []
        for h in s.face_cycle(f):
            for q in range(1, points_on(h) + 1):
                i, j = point_at(h, q)
                piece = (i, j) if seqs[i][j] == h else (i, (j - 1) % len(seqs[i]))
                if stack and stack[-1] == piece:
                    stack.pop()
                else:
                    stack.append(piece)
        if stack:
            involved = {p[0] for p in stack}
            if len(involved) == 1:
                raise CurveNotSimple('curve crosses itself', face=f)
            raise IllegalIntersection('curves cross inside a face', face=f, curves=sorted(involved))


def cut_curve_system(s: CombinatorialMap, curves: Union[CurveSystem, Sequence[CrossCurve]]) -> List[CutComponent]:
    if isinstance(curves, CurveSystem):
        system = curves
    else:
        curves = list(curves)
        if not curves:
            return [CutComponent(s, np.arange(s.num_half_edges), tuple(() for _ in s.hole_faces()))]
        try:
            system = overlay(s, curves)
        except IllegalIntersection as exc:
            raise CurvesNotDisjoint(str(exc), **exc.details)
    return system.cut()


###############################################################################
# CONTRACTIBILITY AND SEPARATION
###############################################################################

class _SideSearch:
    """Breadth-first growth of the two sides of a face-simple curve over G* vertices.

    Crossed edges are blocked, so each side stays inside one component of
    the cut surface. A side is a disk when it touches no hole and its Euler
    characteristic, counted with the crossing points and curve pieces, is 1.
    """

    def __init__(self, s: CombinatorialMap, c: CrossCurve):
        self.s = s
        self.twin = s.twin
        self.nxt = s.nxt
        self.vert = s.vert
        self.face = s.face
        self.hole_face = s.hole_face
        self.edge_id = s.edge_id
        self.length = len(c.crossings)
        self.crossed = {int(self.edge_id[h]) for h in c.crossings}
        self.visited_faces = {int(self.face[h]) for h in c.crossings}
        h0 = c.crossings[0]
        self.starts = (int(self.vert[h0]), int(self.vert[self.twin[h0]]))
        self.owner = {}
        self.members = ([], [])
        self.queues = (deque(), deque())
        self.touches_hole = [False, False]
        self.steps = 0
        for side, v in enumerate(self.starts):
            if v in self.owner:
                break
            self.owner[v] = side
            self.members[side].append(v)
            self.queues[side].append(v)

    def met_at_start(self) -> bool:
        return self.starts[0] == self.starts[1]

    def leaving(self, v: int) -> List[int]:
        return self.s.vertex_cycle(v)

    def expand(self, side: int) -> bool:
        """Grow one vertex; True when the two sides meet"""
        v = self.queues[side].popleft()
        self.steps += 1
        for h in self.leaving(v):
            if self.hole_face[self.face[h]]:
                self.touches_hole[side] = True
            if int(self.edge_id[h]) in self.crossed:
                continue
            u = int(self.vert[self.twin[h]])
            who = self.owner.get(u)
            if who is None:
                self.owner[u] = side
                self.members[side].append(u)
                self.queues[side].append(u)
            elif who != side:
                return True
        return False

    def is_disk(self, side: int) -> bool:
        if self.touches_hole[side]:
            return False
        plain_half_edges = 0
        faces = set()
        for v in self.members[side]:
            for h in self.leaving(v):
                faces.add(int(self.face[h]))
                if int(self.edge_id[h]) not in self.crossed:
                    plain_half_edges += 1
        untouched = len(faces - self.visited_faces)
        vertices = len(self.members[side]) + self.length
        edges = plain_half_edges // 2 + 2 * self.length
        return vertices - edges + self.length + untouched == 1


def is_contractible(s: CombinatorialMap, c: CrossCurve) -> bool:
    """Tandem search from both sides of the curve, stopping at the first disk"""
    if not c.crossings:
        return True
    c.validate(s)
    search = _SideSearch(s, c)
    if search.met_at_start():
        return False
    done = [False, False]
    verdict = [False, False]
    while not (done[0] and done[1]):
        for side in (0, 1):
            if done[side]:
                continue
            if search.expand(side):
                return False
            if not search.queues[side]:
                done[side] = True
                verdict[side] = search.is_disk(side)
        if verdict[0] or verdict[1]:
            return True
    return verdict[0] or verdict[1]


def is_separating(s: CombinatorialMap, c: CrossCurve) -> bool:
    """A simple curve separates iff its two sides never meet"""
    if not c.crossings:
        return True
    c.validate(s)
    search = _SideSearch(s, c)
    if search.met_at_start():
        return False
    while search.queues[0]:
        if search.expand(0):
            return False
    return True


def annulus_equivalent(s: CombinatorialMap, c1: CrossCurve, c2: CrossCurve) -> bool:
    """Disjoint simple curves are homotopic iff they cobound an annulus"""
    for component in cut_curve_system(s, [c1, c2]):
        if component.surface.genus == 0 and component.surface.num_holes == 2 \
                and sorted(component.hole_curves) == [(0,), (1,)]:
            return True
    return False


###############################################################################
# Z2 HOMOLOGY
###############################################################################

def _edge_graph(count: int, a: np.ndarray, b: np.ndarray) -> sp.csr_matrix:
    """Undirected 0/1 adjacency over `count` nodes; loops and parallel edges collapse"""
    keep = a != b
    data = np.ones(int(keep.sum()), dtype=np.int8)
    graph = sp.coo_matrix((data, (a[keep], b[keep])), shape=(count, count)).tocsr()
    graph.data[:] = 1
    return graph


def _pair_lookup(count: int, a: np.ndarray, b: np.ndarray, ids: np.ndarray):
    """Smallest edge id joining two nodes, vectorised over node pairs"""
    keys = np.minimum(a, b) * count + np.maximum(a, b)
    order = np.lexsort((ids, keys))
    sorted_keys, sorted_ids = keys[order], ids[order]

    def lookup(u: np.ndarray, v: np.ndarray) -> np.ndarray:
        q = np.minimum(u, v) * count + np.maximum(u, v)
        return sorted_ids[np.searchsorted(sorted_keys, q)]

    return lookup


def _bfs_tree_edges(count: int, a: np.ndarray, b: np.ndarray, ids: np.ndarray, root: int):
    """Breadth-first spanning tree: per node its predecessor and the edge id leading to it"""
    order, pred = csgraph.breadth_first_order(_edge_graph(count, a, b), root, directed=False,
                                              return_predecessors=True)
    tree_edge = np.full(count, -1, dtype=np.int64)
    reached = order[1:]
    if len(reached):
        tree_edge[reached] = _pair_lookup(count, a, b, ids)(pred[reached], reached)
    return pred, tree_edge


def homology_basis(s: CombinatorialMap, capped: bool = False) -> np.ndarray:
    """Rows are 2g cycles of the graph of s from a tree-cotree decomposition.

    The class of a closed curve is its vector of crossing parities with
    these cycles. With capped=True holes count as ordinary faces, so the
    classes are those of the closed surface obtained by filling every hole
    with a disk; a curve avoiding the holes is non-separating iff its class
    there is non-zero.
    """
    if s.num_holes and not capped:
        raise HasBoundary('homology classes are computed on closed surfaces')
    if 'homology_basis' in s.cache:
        return s.cache['homology_basis']

    edges = s.num_edges
    rep = np.flatnonzero(np.arange(s.num_half_edges) < s.twin)
    ids = s.edge_id[rep]
    tails, heads = s.vert[rep], s.vert[s.twin[rep]]
    pred, tree_edge = _bfs_tree_edges(s.num_vertices, tails, heads, ids, int(s.vert[0]))
    in_tree = np.zeros(edges, dtype=bool)
    in_tree[tree_edge[tree_edge >= 0]] = True

    # cotree: spanning tree of the faces through edges the tree left over
    free = ~in_tree[ids]
    left, right = s.face[rep][free], s.face[s.twin[rep]][free]
    _, cotree_edge = _bfs_tree_edges(s.num_faces_total, left, right, ids[free], int(s.face[0]))
    in_cotree = np.zeros(edges, dtype=bool)
    in_cotree[cotree_edge[cotree_edge >= 0]] = True

    leftover = np.flatnonzero(~in_tree & ~in_cotree)
    if len(leftover) != 2 * s.genus:
        raise InvalidMapError(f'tree-cotree left {len(leftover)} edges for genus {s.genus}')

    rep_of = np.empty(edges, dtype=np.int64)
    rep_of[ids] = rep
    basis = np.zeros((len(leftover), edges), dtype=np.uint8)
    for row, e in enumerate(leftover.tolist()):
        h = int(rep_of[e])
        basis[row, e] ^= 1
        for v in (int(s.vert[h]), int(s.vert[s.twin[h]])):
            while pred[v] >= 0:
                basis[row, tree_edge[v]] ^= 1
                v = int(pred[v])
    s.cache['homology_basis'] = basis
    return basis


def homology_class_z2(s: CombinatorialMap, w: Union[CrossCurve, PrimalWalk]) -> np.ndarray:
    """Class of a curve or primal walk; primal edges and dual edges share ids"""
    basis = homology_basis(s)
    counts = w.edge_counts(s)
    return (basis.astype(np.int64) @ counts) % 2


def z2_rank(vectors: Sequence[np.ndarray]) -> int:
    """Rank over F2 by row reduction"""
    if not len(vectors):
        return 0
    rows = np.array(vectors, dtype=np.uint8) % 2
    rank = 0
    nr, nc = rows.shape
    for col in range(nc):
        pivot = None
        for i in range(rank, nr):
            if rows[i, col]:
                pivot = i
                break
        if pivot is None:
            continue
        rows[[rank, pivot]] = rows[[pivot, rank]]
        for i in range(nr):
            if i != rank and rows[i, col]:
                rows[i] ^= rows[rank]
        rank += 1
        if rank == nr:
            break
    return rank
