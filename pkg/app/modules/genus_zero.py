"""
Genus Zero Module
Pants decompositions of genus-zero surfaces with few crossings per edge.

A boundary tree T joins the holes through the face-adjacency graph, each
hole hanging off T as a leaf. Walking around T gives a closed path p that
touches every hole once, in the order B_1, ..., B_b. Holes are then paired
round after round; the curve of a group of consecutive holes goes around
each of them and runs along the stretch of p between them on both sides.
Since the groups of one round cover disjoint stretches of p, an edge is
crossed a bounded number of times per round and O(log b) times overall.
"""

import time
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from app.modules.combinatorial_map import CombinatorialMap, classify
from app.modules.curves import CrossCurve, CurveSystem, cut_curve_system, reduce_backtracks
from app.utils.errors import (
    InvalidMapError, LedgerViolation, NotGenusZeroDecomposition, SurfaceError, TooFewBoundaries, WrongGenus,
)

logger = logging.getLogger(__name__)


class GenusZeroConfig:
    """Frozen multiplicity calibration: multiplicity <= A * ceil(log2 b) + A0"""

    A = 8
    A0 = 8


def multiplicity_bound(boundary_count: int) -> int:
    rounds = int(np.ceil(np.log2(max(boundary_count, 2))))
    return GenusZeroConfig.A * rounds + GenusZeroConfig.A0


def multiplicity(s: CombinatorialMap, curves) -> int:
    """Largest number of curve crossings on a single edge"""
    if isinstance(curves, CurveSystem):
        curves = curves.curves
    curves = list(curves)
    if not curves:
        return 0
    counts = np.zeros(s.num_edges, dtype=np.int64)
    for c in curves:
        counts += c.edge_counts(s)
    return int(counts.max())


###############################################################################
# BOUNDARY TREE
###############################################################################

@dataclass
class BoundaryTree:
    """Tree of faces joining the holes, and the closed path around it"""

    tree_edges: List[int]
    ports: Dict[int, int]  # hole face -> side of the hole in the adjacent tree face
    order: List[int]  # hole faces in the order p touches them
    events: List[Tuple[str, int]] = field(default_factory=list)  # ('cross', h) or ('touch', hole face)

    @property
    def path_crossings(self) -> List[int]:
        return [h for kind, h in self.events if kind == 'cross']

    def tree_multiplicity(self, s: CombinatorialMap) -> int:
        if not self.tree_edges:
            return 0
        return int(np.bincount(self.tree_edges, minlength=s.num_edges).max())

    def path_multiplicity(self, s: CombinatorialMap) -> int:
        crossings = self.path_crossings
        if not crossings:
            return 0
        return int(np.bincount(s.edge_id[crossings], minlength=s.num_edges).max())


def _check_genus_zero(s: CombinatorialMap) -> None:
    if s.genus != 0:
        raise WrongGenus(f'expected a genus-0 surface, got genus {s.genus}', genus=s.genus)
    if s.num_holes < 3:
        raise TooFewBoundaries(f'need at least 3 boundary components, got {s.num_holes}',
                               boundary_count=s.num_holes)


def _port_side(s: CombinatorialMap, hole: int) -> int:
    """Side of the hole's neighbour face across the first usable boundary side"""
    twin, hole_face, face = s.twin, s.hole_face, s.face
    for h in s.face_cycle(hole):
        if not hole_face[face[twin[h]]]:
            return int(twin[h])
    raise InvalidMapError('hole is surrounded by holes', hole=hole)


def boundary_tree(s: CombinatorialMap) -> BoundaryTree:
    """Multi-source BFS from the holes' ports, joined by a spanning tree over the BFS cells"""
    _check_genus_zero(s)
    holes = s.hole_faces()
    ports = {b: _port_side(s, b) for b in holes}
    sources = np.array(sorted({int(s.face[h]) for h in ports.values()}), dtype=np.int64)
    count = s.num_faces_total

    rep = np.flatnonzero(np.arange(s.num_half_edges) < s.twin)
    a, b = s.face[rep], s.face[s.twin[rep]]
    usable = ~s.hole_face[a] & ~s.hole_face[b] & (a != b)
    rep, a, b = rep[usable], a[usable], b[usable]
    ids = s.edge_id[rep]
    graph = sp.coo_matrix((np.ones(len(rep)), (a, b)), shape=(count, count)).tocsr()
    graph.data[:] = 1.0
    dist, pred, cell = csgraph.dijkstra(graph, directed=False, indices=sources, unweighted=True,
                                        return_predecessors=True, min_only=True)

    keys = np.minimum(a, b) * count + np.maximum(a, b)
    order = np.lexsort((ids, keys))
    sorted_keys, sorted_ids = keys[order], ids[order]

    def edge_between(u: int, v: int) -> int:
        return int(sorted_ids[np.searchsorted(sorted_keys, min(u, v) * count + max(u, v))])

    # cheapest edge between every pair of neighbouring cells
    reached = np.isfinite(dist[a]) & np.isfinite(dist[b])
    across = reached & (cell[a] != cell[b])
    index = {int(f): i for i, f in enumerate(sources)}
    ca = np.array([index[int(x)] for x in cell[a][across]], dtype=np.int64)
    cb = np.array([index[int(x)] for x in cell[b][across]], dtype=np.int64)
    cost = dist[a][across] + dist[b][across] + 1
    best: Dict[Tuple[int, int], Tuple[float, int, int, int]] = {}
    for x, y, c, e, u, v in zip(ca.tolist(), cb.tolist(), cost.tolist(), ids[across].tolist(),
                                a[across].tolist(), b[across].tolist()):
        pair = (min(x, y), max(x, y))
        if pair not in best or (c, e) < best[pair][:2]:
            best[pair] = (c, e, u, v)

    cells = len(sources)
    tree = set()
    if cells > 1:
        if not best:
            raise InvalidMapError('holes are not connected through interior faces')
        pairs = list(best)
        weights = [best[p][0] for p in pairs]
        rows, cols = zip(*pairs)
        joined = csgraph.minimum_spanning_tree(sp.coo_matrix((weights, (rows, cols)), shape=(cells, cells)).tocsr())
        chosen = list(zip(*joined.nonzero()))
        if len(chosen) != cells - 1:
            raise InvalidMapError('holes are not connected through interior faces')
        for x, y in chosen:
            x, y = int(x), int(y)
            _, e, u, v = best[(min(x, y), max(x, y))]
            tree.add(e)
            for f in (u, v):
                # an existing path back to the source is already in the tree
                while pred[f] >= 0:
                    step = edge_between(int(pred[f]), f)
                    if step in tree:
                        break
                    tree.add(step)
                    f = int(pred[f])

    bt = BoundaryTree(tree_edges=sorted(tree), ports=ports, order=[])
    _tour(s, bt)
    logger.debug(f"Boundary tree: {len(bt.tree_edges)} edges joining {len(holes)} holes")
    return bt


def _tour(s: CombinatorialMap, bt: BoundaryTree) -> None:
    """Walk around the tree, turning the same way at every face"""
    face, twin, edge_id, hole_face = s.face, s.twin, s.edge_id, s.hole_face
    tree = set(bt.tree_edges)
    hole_of_port = {h: b for b, h in bt.ports.items()}

    def ordered_sides(f, entry, include_entry):
        cycle = s.face_cycle(f)
        idx = cycle.index(entry)
        return cycle[idx:] + cycle[:idx] if include_entry else cycle[idx + 1:] + cycle[:idx]

    first_hole = min(bt.ports)
    start = bt.ports[first_hole]
    stack = [(iter(ordered_sides(int(face[start]), start, True)), None)]
    while stack:
        sides, back = stack[-1]
        x = next(sides, None)
        if x is None:
            stack.pop()
            if back is not None:
                bt.events.append(('cross', back))
            continue
        if x in hole_of_port:
            bt.events.append(('touch', hole_of_port[x]))
            bt.order.append(hole_of_port[x])
        elif int(edge_id[x]) in tree and not hole_face[face[twin[x]]]:
            down = int(twin[x])
            bt.events.append(('cross', down))
            stack.append((iter(ordered_sides(int(face[down]), down, False)), x))


###############################################################################
# PAIRING DECOMPOSITION
###############################################################################

def _detour(s: CombinatorialMap, hole: int, port: int) -> List[int]:
    """Crossings going once around a hole, leaving and re-entering the port face"""
    face, twin, phi, hole_face = s.face, s.twin, s.phi, s.hole_face
    crossings = []
    k = port
    while True:
        k = int(phi[k])
        while face[twin[k]] != hole:
            if hole_face[face[twin[k]]]:
                raise InvalidMapError('holes share a vertex', hole=hole)
            crossings.append(int(twin[k]))
            k = int(phi[twin[k]])
        if k == port:
            break
    return [int(twin[h]) for h in reversed(crossings)]


def _range_curve(s: CombinatorialMap, bt: BoundaryTree, touch_at: List[int], i: int, j: int) -> CrossCurve:
    """Curve around the holes B_i..B_j and the stretch of p joining them"""
    outer: List[int] = []
    inner: List[int] = []
    for kind, x in bt.events[touch_at[i]:touch_at[j] + 1]:
        if kind == 'touch':
            outer.extend(_detour(s, x, bt.ports[x]))
        else:
            outer.append(x)
            inner.append(int(s.twin[x]))
    crossings = reduce_backtracks(outer + inner[::-1], s.twin)
    return CrossCurve(tuple(crossings))


@dataclass
class PairingResult:
    curves: List[CrossCurve]
    groups: List[Tuple[int, int]]  # tour position ranges, one per curve
    rounds: int
    tree: BoundaryTree


def pairing_rounds(s: CombinatorialMap, bt: Optional[BoundaryTree] = None) -> PairingResult:
    bt = boundary_tree(s) if bt is None else bt
    touch_at = [k for k, (kind, _) in enumerate(bt.events) if kind == 'touch']
    groups: List[Tuple[int, int]] = [(i, i) for i in range(len(bt.order))]
    made: List[Tuple[int, int]] = []
    rounds = 0
    while len(groups) > 3:
        rounds += 1
        merged = [(groups[k][0], groups[k + 1][1]) for k in range(0, len(groups) - 1, 2)]
        made.extend(merged)
        if len(groups) % 2:
            merged.append(groups[-1])
        groups = merged
    if len(groups) == 2:
        # the two remaining curves bound the same annulus
        drop = groups[1] if groups[1][0] != groups[1][1] else groups[0]
        made.remove(drop)

    curves = [_range_curve(s, bt, touch_at, i, j) for i, j in made]
    return PairingResult(curves=curves, groups=made, rounds=rounds, tree=bt)


def verify_pants(s: CombinatorialMap, curves: Sequence[CrossCurve]) -> int:
    """Number of pants the curves cut s into; raises when some piece is not a pair of pants"""
    components = cut_curve_system(s, list(curves))
    for component in components:
        if not classify(component.surface).is_pants:
            raise LedgerViolation('cutting did not produce a pair of pants',
                                  genus=component.surface.genus, holes=component.surface.num_holes)
    return len(components)


def pairing_decomposition(s: CombinatorialMap, verify: bool = True) -> List[CrossCurve]:
    """b - 3 curves cutting a genus-0 surface with b holes into pants"""
    _check_genus_zero(s)
    start = time.perf_counter()
    result = pairing_rounds(s)
    b = s.num_holes
    if len(result.curves) != b - 3:
        raise LedgerViolation(f'expected {b - 3} curves, built {len(result.curves)}')
    if verify and result.curves:
        pants = verify_pants(s, result.curves)
        if pants != b - 2:
            raise LedgerViolation(f'expected {b - 2} pants, got {pants}')
    mult = multiplicity(s, result.curves)
    if mult > multiplicity_bound(b):
        raise LedgerViolation(f'multiplicity {mult} exceeds {multiplicity_bound(b)}', b=b)
    logger.info(f"Genus-0 decomposition: b={b}, {len(result.curves)} curves, {result.rounds} rounds, "
                f"multiplicity {mult} ({(time.perf_counter() - start) * 1000:.1f} ms)")
    return result.curves


def genus_zero_row(s: CombinatorialMap) -> Dict[str, object]:
    """CSV row b,n,multiplicity,total_length,time_ms"""
    start = time.perf_counter()
    curves = pairing_decomposition(s)
    return {
        'b': s.num_holes,
        'n': s.n,
        'multiplicity': multiplicity(s, curves),
        'total_length': sum(c.length(s) for c in curves),
        'time_ms': round((time.perf_counter() - start) * 1000, 3),
    }


###############################################################################
# COMPLETING A GENUS ZERO DECOMPOSITION
###############################################################################

def lift_curve(parent: np.ndarray, host: CombinatorialMap, c: CrossCurve) -> CrossCurve:
    """Curve on a cut component read back on the host surface"""
    lifted = [int(parent[h]) for h in c.crossings]
    if min(lifted, default=0) < 0:
        raise InvalidMapError('curve crosses an edge created by cutting')
    return CrossCurve(tuple(reduce_backtracks(lifted, host.twin)))


def complete_genus_zero(s: CombinatorialMap, gamma: Sequence[CrossCurve]) -> List[CrossCurve]:
    """Extend a genus-zero decomposition to a full pants decomposition"""
    gamma = list(gamma)
    try:
        components = cut_curve_system(s, gamma)
    except SurfaceError as exc:
        raise NotGenusZeroDecomposition(f'curves do not form a decomposition: {exc}')
    if len(components) != 1 or components[0].surface.genus != 0:
        raise NotGenusZeroDecomposition('complement must be one connected genus-0 surface',
                                        components=len(components),
                                        genus=[c.surface.genus for c in components])
    piece = components[0]
    extra = pairing_decomposition(piece.surface, verify=False) if piece.surface.num_holes >= 3 else []
    lifted = [lift_curve(piece.parent, s, c) for c in extra]
    full = gamma + lifted
    expected = 3 * s.genus + s.num_holes - 3
    if len(full) != expected:
        raise LedgerViolation(f'expected {expected} curves, built {len(full)}')
    if full:
        verify_pants(s, full)
    return full


def greedy_genus_zero_decomposition(s: CombinatorialMap) -> List[CrossCurve]:
    """g disjoint non-separating curves, each shortest on what the previous ones leave"""
    from app.modules.systole import shortest_nonseparating

    gamma: List[CrossCurve] = []
    for _ in range(s.genus):
        piece = cut_curve_system(s, gamma)[0]
        _, curve = shortest_nonseparating(piece.surface)
        gamma.append(lift_curve(piece.parent, s, curve))
    return gamma
