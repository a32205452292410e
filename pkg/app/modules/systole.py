"""
Systole Module
Exact shortest non-contractible, non-separating and splitting cycles by
enumerating simple cycles of the face-adjacency graph in increasing length.

Cycles are rooted at their smallest face and explored in edge-id order, so
results follow the order (length, root, edge sequence). A shortest
non-contractible (or non-separating) cycle is isometric: every vertex on it
sits at cycle distance equal to its graph distance from the root, which is
what the search prunes on. The splitting search only uses the weaker
distance bound, and the oracle prunes nothing.

Enumeration is exponential in the cycle length, so beyond
SystoleConfig.ENUMERATION_LIMIT vertices the non-contractible and
non-separating searches switch to fundamental cycles of shortest-path trees,
which is exact as well and polynomial.

Author: Surface Lab Team
Version: 1.0.0
"""

import math
import time
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from app.modules.combinatorial_map import CombinatorialMap, CrossMetricSurface, Triangulation, dualize
from app.modules.curves import CrossCurve, PrimalWalk, homology_basis, is_contractible, is_separating
from app.utils.errors import BudgetExceeded, NoNoncontractibleCurve, NotApplicable

logger = logging.getLogger(__name__)

Surface = Union[Triangulation, CrossMetricSurface, CombinatorialMap]
Cycle = Union[CrossCurve, PrimalWalk]


class SystoleConfig:
    """Search constants"""

    ORACLE_BUDGET = 2_000_000
    ENUMERATION_LIMIT = 64  # larger surfaces use the tree search
    TREE_BATCH = 256
    METHODS = frozenset({'auto', 'enumerate', 'tree'})
    BOUND_FACTOR = 4.0
    PREDICATES = frozenset({'noncontractible', 'nonseparating', 'splitting'})


def pruning_bound(n: int, genus: int) -> float:
    """4 * sqrt(n / max(g, 1)) * (2 + log2(g + 1))"""
    return SystoleConfig.BOUND_FACTOR * math.sqrt(n / max(genus, 1)) * (2 + math.log2(genus + 1))


###############################################################################
# CYCLE ENUMERATION
###############################################################################

class CycleSearch:
    """Simple cycles of the face-adjacency graph of a cross-metric surface"""

    def __init__(self, s: CombinatorialMap, allowed_faces: Optional[np.ndarray] = None):
        self.s = s
        self.twin = s.twin.tolist()
        allowed = ~s.hole_face if allowed_faces is None else (np.asarray(allowed_faces, dtype=bool) & ~s.hole_face)
        self.allowed = allowed.tolist()
        face = s.face.tolist()
        edge_id = s.edge_id.tolist()

        self.adjacency: List[List[Tuple[int, int, int]]] = [[] for _ in range(s.num_faces_total)]
        for h in range(s.num_half_edges):
            f, g = face[self.twin[h]], face[h]
            if self.allowed[f] and self.allowed[g]:
                # moving from f into g enters half-edge h
                self.adjacency[f].append((edge_id[h], h, g))
        for lst in self.adjacency:
            lst.sort()
        self.roots = [f for f in range(s.num_faces_total) if self.allowed[f]]
        self.class_masks = None
        if s.num_holes == 0 and s.num_components == 1:
            basis = homology_basis(s)
            masks = [0] * s.num_edges
            for row in range(basis.shape[0]):
                for e in np.flatnonzero(basis[row]).tolist():
                    masks[e] |= 1 << row
            self.class_masks = masks
        self.enumerated = 0

    def distances(self, root: int, radius: int) -> Dict[int, int]:
        """BFS distances from root among faces not smaller than root"""
        dist = {root: 0}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            du = dist[u]
            if du >= radius:
                continue
            for _, _, g in self.adjacency[u]:
                if g >= root and g not in dist:
                    dist[g] = du + 1
                    queue.append(g)
        return dist

    def cycles(self, root: int, length: int, dist: Optional[Dict[int, int]],
               mode: str) -> Iterator[Tuple[List[int], List[int]]]:
        """Cycles of exactly `length` edges whose smallest face is root, each once"""
        adjacency = self.adjacency
        twin = self.twin
        path_h: List[int] = []
        path_e: List[int] = []
        on_path = {root}

        def extend(u: int, depth: int):
            for e, h, g in adjacency[u]:
                if g == root:
                    if depth + 1 != length:
                        continue
                    if length == 1:
                        if h > twin[h]:
                            continue
                    elif path_e[0] >= e:
                        continue
                    yield path_h + [h], path_e + [e]
                    continue
                if depth + 1 >= length or g < root or g in on_path:
                    continue
                if mode != 'none':
                    dg = dist.get(g)
                    target = min(depth + 1, length - depth - 1)
                    if dg is None or dg > target or (mode == 'isometric' and dg != target):
                        continue
                on_path.add(g)
                path_h.append(h)
                path_e.append(e)
                yield from extend(g, depth + 1)
                on_path.discard(g)
                path_h.pop()
                path_e.pop()

        yield from extend(root, 0)

    def class_mask(self, edges: List[int]) -> Optional[int]:
        if self.class_masks is None:
            return None
        mask = 0
        for e in edges:
            mask ^= self.class_masks[e]
        return mask

    def predicate(self, name: str) -> Callable[[List[int], List[int]], bool]:
        s = self.s

        def noncontractible(hs, es):
            mask = self.class_mask(es)
            if mask:
                return True
            return not is_contractible(s, CrossCurve(tuple(hs)))

        def nonseparating(hs, es):
            mask = self.class_mask(es)
            if mask is not None:
                return mask != 0
            return not is_separating(s, CrossCurve(tuple(hs)))

        def splitting(hs, es):
            mask = self.class_mask(es)
            if mask is None:
                separating = is_separating(s, CrossCurve(tuple(hs)))
            else:
                separating = mask == 0
            return separating and not is_contractible(s, CrossCurve(tuple(hs)))

        return {'noncontractible': noncontractible, 'nonseparating': nonseparating,
                'splitting': splitting}[name]

    def shortest(self, test: Callable[[List[int], List[int]], bool], max_length: int, mode: str,
                 budget: Optional[int] = None) -> Optional[Tuple[int, int, List[int]]]:
        """First cycle passing the test in (length, root, edge sequence) order"""
        best: Optional[Tuple[int, int, List[int]]] = None
        for root in self.roots:
            limit = best[0] - 1 if best else max_length
            if limit < 1:
                break
            dist = self.distances(root, limit // 2 + 1) if mode != 'none' else None
            for length in range(1, limit + 1):
                hit = None
                for hs, es in self.cycles(root, length, dist, mode):
                    self.enumerated += 1
                    if budget is not None and self.enumerated > budget:
                        raise BudgetExceeded(f'enumerated more than {budget} cycles', budget=budget)
                    if test(hs, es):
                        hit = hs
                        break
                if hit is not None:
                    best = (length, root, hit)
                    break
        return best


###############################################################################
# FUNDAMENTAL CYCLES OF SHORTEST-PATH TREES
###############################################################################

class TreeCycleSearch:
    """Shortest non-contractible and non-separating cycles in polynomial time.

    For every root face a shortest-path tree of the face-adjacency graph is
    grown with scipy's dijkstra, and each edge outside the tree closes a
    fundamental cycle. A shortest non-contractible (or non-separating) cycle
    through the root is homotopic to a product of fundamental cycles no
    longer than itself, one of which is again non-contractible (or
    non-separating), so the minimum over all roots is exact. Z2 classes come
    from bit-packed columns of the homology basis, accumulated along the
    tree by pointer doubling. With unit weights a shortest non-contractible
    fundamental cycle shares only the root between its two tree paths, so
    only zero-class candidates whose paths leave the root through different
    children go through the contractibility test.
    """

    def __init__(self, s: CombinatorialMap, allowed_faces: Optional[np.ndarray] = None):
        self.s = s
        allowed = ~s.hole_face if allowed_faces is None else (np.asarray(allowed_faces, dtype=bool) & ~s.hole_face)
        self.faces = np.flatnonzero(allowed)
        count = len(self.faces)
        node = np.full(s.num_faces_total, -1, dtype=np.int64)
        node[self.faces] = np.arange(count)

        rep = np.flatnonzero(np.arange(s.num_half_edges) < s.twin)
        tail, head = node[s.face[s.twin[rep]]], node[s.face[rep]]
        keep = (tail >= 0) & (head >= 0)
        self.rep, self.tail, self.head = rep[keep], tail[keep], head[keep]
        self.w = s.weight[self.rep]
        self.position = np.arange(len(self.rep))
        self.count = count
        self.zero_weights = bool((self.w == 0).any())
        # lexicographic (weight, crossings) so zero-weight chords still give unique tree distances
        self.scale = count + 1 if self.zero_weights else 1

        # one graph edge per pair of faces: the lightest, then the lowest id
        plain = self.tail != self.head
        keys = np.minimum(self.tail, self.head) * count + np.maximum(self.tail, self.head)
        order = np.lexsort((self.position, self.w, keys))
        order = order[plain[order]]
        first = np.ones(len(order), dtype=bool)
        first[1:] = keys[order][1:] != keys[order][:-1]
        chosen = order[first]
        self._keys, self._chosen = keys[chosen], chosen
        data = (self.w[chosen] * self.scale + 1).astype(float)
        self.graph = sp.coo_matrix((data, (self.tail[chosen], self.head[chosen])), shape=(count, count)).tocsr()

        self.masks = None
        if s.num_components == 1 and s.genus > 0 and count:
            basis = homology_basis(s, capped=True)
            self.masks = np.packbits(basis[:, s.edge_id[self.rep]], axis=0).T.copy()
        self.checked = 0

    def _tree_edges(self, pred: np.ndarray) -> np.ndarray:
        tree = np.full(self.count, -1, dtype=np.int64)
        nodes = np.flatnonzero(pred >= 0)
        if len(nodes):
            q = np.minimum(pred[nodes], nodes) * self.count + np.maximum(pred[nodes], nodes)
            tree[nodes] = self._chosen[np.searchsorted(self._keys, q)]
        return tree

    def _classes(self, pred: np.ndarray, tree: np.ndarray) -> np.ndarray:
        """Packed class of the tree path from every face to the root"""
        classes = np.zeros((self.count, self.masks.shape[1]), dtype=np.uint8)
        has = tree >= 0
        classes[has] = self.masks[tree[has]]
        up = np.where(pred >= 0, pred, -1).astype(np.int64)
        while True:
            live = np.flatnonzero(up >= 0)
            if not len(live):
                return classes
            step = classes.copy()
            step[live] ^= classes[up[live]]
            jump = up.copy()
            jump[live] = up[up[live]]
            classes, up = step, jump

    def _branches(self, root: int, pred: np.ndarray) -> np.ndarray:
        """Child of the root each face hangs from (the face itself at depth 0 or 1)"""
        top = np.arange(self.count)
        deep = (pred >= 0) & (pred != root)
        top[deep] = pred[deep]
        while True:
            nxt = top[top]
            if np.array_equal(nxt, top):
                return top
            top = nxt

    def _cycle(self, pred: np.ndarray, tree: np.ndarray, e: int) -> CrossCurve:
        """Fundamental cycle of edge e, with the common part of its tree paths removed"""
        a, b = int(self.tail[e]), int(self.head[e])
        above = [a]
        while pred[above[-1]] >= 0:
            above.append(int(pred[above[-1]]))
        depth = {x: k for k, x in enumerate(above)}
        from_b = []
        y = b
        while y not in depth:
            from_b.append(int(tree[y]))
            y = int(pred[y])
        to_a = [int(tree[above[k]]) for k in range(depth[y])]
        walk = to_a[::-1] + [e] + from_b
        return CrossCurve.from_edge_cycle(self.s, int(self.faces[y]), self.rep[walk].tolist())

    def shortest(self, name: str) -> Optional[Tuple[int, CrossCurve]]:
        if name not in ('noncontractible', 'nonseparating'):
            raise NotApplicable(f'the tree search does not handle {name} cycles')
        if self.masks is None and name == 'nonseparating':
            return None
        best: List = [math.inf, None]
        if self.masks is not None:
            self._sweep(best, contractibility=False)
        if name == 'noncontractible':
            self._sweep(best, contractibility=True)
        if best[1] is None:
            return None
        return int(best[0]), best[1]

    def _sweep(self, best: List, contractibility: bool) -> None:
        batch = SystoleConfig.TREE_BATCH
        seen = set()
        for lo in range(0, self.count, batch):
            roots = np.arange(lo, min(lo + batch, self.count))
            dist, preds = csgraph.dijkstra(self.graph, directed=False, indices=roots,
                                           return_predecessors=True, unweighted=not self.zero_weights)
            for k, root in enumerate(roots.tolist()):
                pred = preds[k].astype(np.int64)
                reached = np.isfinite(dist[k])
                true = np.where(reached, np.floor(np.where(reached, dist[k], 0) / self.scale), np.inf)
                tree = self._tree_edges(pred)
                ok = reached[self.tail] & reached[self.head] & \
                    (tree[self.tail] != self.position) & (tree[self.head] != self.position)
                length = true[self.tail] + true[self.head] + self.w
                if self.masks is not None:
                    classes = self._classes(pred, tree)
                    nonzero = (classes[self.tail] ^ classes[self.head] ^ self.masks).any(axis=1)
                else:
                    nonzero = np.zeros(len(self.rep), dtype=bool)

                hits = np.flatnonzero(ok & nonzero & (length < best[0]))
                if len(hits):
                    e = int(hits[np.argmin(length[hits])])
                    curve = self._cycle(pred, tree, e)
                    best[0], best[1] = curve.length(self.s), curve
                if not contractibility:
                    continue

                zero = ok & ~nonzero & (length < best[0])
                if not self.zero_weights:
                    branch = self._branches(root, pred)
                    zero &= (branch[self.tail] != branch[self.head]) | \
                        (self.tail == root) | (self.head == root)
                candidates = np.flatnonzero(zero)
                for e in candidates[np.argsort(length[candidates], kind='stable')].tolist():
                    if length[e] >= best[0]:
                        break
                    curve = self._cycle(pred, tree, e)
                    key = frozenset(self.s.edge_id[list(curve.crossings)].tolist())
                    if key in seen:
                        continue
                    seen.add(key)
                    self.checked += 1
                    if not is_contractible(self.s, curve):
                        best[0], best[1] = curve.length(self.s), curve
                        break


###############################################################################
# PUBLIC OPERATIONS
###############################################################################

def _as_cross_metric(x: Surface) -> Tuple[CombinatorialMap, bool]:
    if isinstance(x, Triangulation):
        return dualize(x), True
    return x, False


def _package(s: CombinatorialMap, hs: List[int], primal: bool) -> Cycle:
    if primal:
        twin = s.twin
        return PrimalWalk(tuple(int(twin[h]) for h in hs))
    return CrossCurve(tuple(hs))


def _choose_method(s: CombinatorialMap, method: str) -> str:
    if method not in SystoleConfig.METHODS:
        raise NotApplicable(f'unknown search method: {method}')
    if method == 'auto':
        return 'enumerate' if s.n <= SystoleConfig.ENUMERATION_LIMIT else 'tree'
    return method


def _exact(x: Surface, name: str, allowed_faces: Optional[np.ndarray] = None,
           method: str = 'auto') -> Optional[Tuple[int, Cycle]]:
    s, primal = _as_cross_metric(x)
    if name != 'splitting' and _choose_method(s, method) == 'tree':
        search = TreeCycleSearch(s, allowed_faces)
        found = search.shortest(name)
        if found is None:
            return None
        length, curve = found
        logger.debug(f"Shortest {name} cycle: length {length}, {search.checked} contractibility tests")
        return length, _package(s, list(curve.crossings), primal)

    search = CycleSearch(s, allowed_faces)
    if name == 'splitting' or search.class_masks is None:
        mode = 'metric'
    else:
        mode = 'isometric'
    test = search.predicate(name)
    bound = int(math.floor(pruning_bound(max(s.n, 1), s.genus)))
    found = search.shortest(test, max(bound, 1), mode)
    if found is None:
        logger.warning(f"No {name} cycle within the pruning bound {bound}; searching all lengths")
        found = search.shortest(test, len(search.roots), mode)
    if found is None:
        return None
    length, _, hs = found
    logger.debug(f"Shortest {name} cycle: length {length} after {search.enumerated} candidates")
    return length, _package(s, hs, primal)


def shortest_noncontractible(x: Surface, allowed_faces: Optional[np.ndarray] = None,
                             method: str = 'auto') -> Tuple[int, Cycle]:
    """Edge-width: shortest non-contractible simple cycle.

    method is 'enumerate' (simple cycles in increasing length), 'tree'
    (fundamental cycles of shortest-path trees) or 'auto', which enumerates
    only on small surfaces. Both are exact.
    """
    s, _ = _as_cross_metric(x)
    if s.genus == 0 and s.num_holes <= 1:
        raise NoNoncontractibleCurve('every closed curve on a sphere or disk is contractible')
    result = _exact(x, 'noncontractible', allowed_faces, method)
    if result is None:
        raise NoNoncontractibleCurve('no non-contractible cycle found')
    return result


def shortest_nonseparating(x: Surface, allowed_faces: Optional[np.ndarray] = None,
                           method: str = 'auto') -> Tuple[int, Cycle]:
    s, _ = _as_cross_metric(x)
    if s.genus == 0:
        raise NoNoncontractibleCurve('every simple closed curve separates a genus-0 surface')
    result = _exact(x, 'nonseparating', allowed_faces, method)
    if result is None:
        raise NoNoncontractibleCurve('no non-separating cycle found')
    return result


def shortest_splitting(x: Surface) -> Tuple[int, Cycle]:
    """Shortest simple separating non-contractible cycle"""
    s, _ = _as_cross_metric(x)
    if s.genus < 2:
        raise NotApplicable(f'splitting cycles need genus at least 2 (genus {s.genus})')
    result = _exact(x, 'splitting')
    if result is None:
        raise NotApplicable('no splitting cycle found')
    return result


def brute_force_oracle(x: Surface, predicate: Union[str, Callable[[CombinatorialMap, CrossCurve], bool]],
                       budget: Optional[int] = None) -> Optional[Tuple[int, Cycle]]:
    """Exhaustive minimum over all simple cycles, without pruning"""
    s, primal = _as_cross_metric(x)
    search = CycleSearch(s)
    if isinstance(predicate, str):
        test = search.predicate(predicate)
    else:
        def test(hs, es, _p=predicate):
            return bool(_p(s, CrossCurve(tuple(hs))))
    budget = SystoleConfig.ORACLE_BUDGET if budget is None else budget
    found = search.shortest(test, len(search.roots), 'none', budget=budget)
    if found is None:
        return None
    length, _, hs = found
    return length, _package(s, hs, primal)


###############################################################################
# REPORT
###############################################################################

@dataclass
class SystoleReport:
    n: int
    genus: int
    edge_width: Optional[int]
    nonseparating_width: Optional[int]
    splitting_width: Optional[int]
    witnesses: Dict[str, Cycle] = field(default_factory=dict)
    time_ms: float = 0.0

    def to_row(self) -> Dict[str, object]:
        return {
            'n': self.n,
            'g': self.genus,
            'edge_width': self.edge_width,
            'nonsep': self.nonseparating_width,
            'splitting': self.splitting_width,
            'time_ms': round(self.time_ms, 3),
        }


def systole_report(x: Surface) -> SystoleReport:
    start = time.perf_counter()
    s, _ = _as_cross_metric(x)
    report = SystoleReport(n=s.n, genus=s.genus, edge_width=None, nonseparating_width=None,
                           splitting_width=None)
    for key, op in (('edge_width', shortest_noncontractible),
                    ('nonseparating_width', shortest_nonseparating),
                    ('splitting_width', shortest_splitting)):
        try:
            length, cycle = op(x)
        except (NoNoncontractibleCurve, NotApplicable):
            continue
        setattr(report, key, length)
        report.witnesses[key] = cycle
    report.time_ms = (time.perf_counter() - start) * 1000
    bound = pruning_bound(max(s.n, 1), s.genus)
    if report.edge_width is not None and report.edge_width > bound:
        logger.warning(f"Edge-width {report.edge_width} exceeds the pruning bound {bound:.1f}")
    return report
