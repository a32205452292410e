"""
Pants Module
Short pants decompositions by sweeping curves across a cross-metric surface.

The swept region R starts as the holes. Each step pushes every boundary
curve one face to the right: the faces touching R form the next layer and
are added one at a time in increasing face id. The curves at step c are the
boundaries of a thin neighbourhood of R_c. A face touching R along two or
more separate arcs is a tangency; rewiring it either discards a disk and
carries on, splits one curve, or merges two. At that point the step s with
total length at most ell is chosen, and a path eta found by walking parent
pointers down from the tangency face joins the curves of step s into the
new boundary Delta.

The sweep cannot walk across a face that borders itself, so a map with
such faces is refused up front. When a round cannot be swept the driver
completes every remaining piece directly: shortest non-separating curves
down to genus zero, then the pairing decomposition. A round whose starting
boundary is longer than its ell doubles C and restarts the whole run.

Author: Surface Lab Team
Version: 1.0.0
"""

import json
import math
import time
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from app.modules.combinatorial_map import (
    Classification, CombinatorialMap, CutComponent, classify_counts, disjoint_union,
)
from app.modules.curves import CrossCurve, boundary_length, cut_curve_system, interface_curves, reduce_backtracks
from app.modules.genus_zero import complete_genus_zero, greedy_genus_zero_decomposition, lift_curve, verify_pants
from app.modules.systole import shortest_noncontractible
from app.utils.errors import (
    BoundViolation, BudgetExceeded, ComponentNotDecomposable, FaceMeetsItself, GenusTooSmall, HasBoundary,
    InitialBoundaryTooLong, LedgerViolation, NotInMergeState, NotInSplitState, SurfaceError, TangencyPresent,
)
from app.utils.validation import log_event

logger = logging.getLogger(__name__)


class PantsConfig:
    """Driver constants"""

    C = 8.0
    OP_BUDGET_K = 400
    MAX_ESCALATIONS = 12


###############################################################################
# STATE
###############################################################################

Arc = Tuple[Tuple[int, ...], int]  # contact sides of a face and the curve label they touch


@dataclass
class Tangency:
    kind: str  # 'same-curve' or 'different-curves'
    face: int
    arcs: List[Arc]
    labels: Tuple[int, ...]


@dataclass
class RewireOutcome:
    kind: str  # 'continued', 'split' or 'merged'
    labels: Tuple[int, ...] = ()
    arcs: Tuple[int, int] = (0, 0)  # the two arcs eta passes through
    filled: int = 0


@dataclass
class DecompositionStep:
    delta: List[CrossCurve]
    remainder: List[CutComponent]
    discarded: List[CutComponent]
    s: int
    r: int
    eta: List[int]
    phase: str
    totals: List[int]
    boundary_before: int
    boundary_after: int
    delta_of_label: Dict[int, int] = field(default_factory=dict)  # untouched curve label -> Delta index
    fallback: bool = False


class ShiftState:
    """Swept region, its layering and the per-step curve lengths"""

    def __init__(self, surface: CombinatorialMap):
        m = surface
        looped = np.flatnonzero((m.face == m.face[m.twin]) & ~m.hole)
        if len(looped):
            raise FaceMeetsItself('the sweep needs faces that do not border themselves',
                                  face=int(m.face[looped[0]]), edges=len(looped) // 2)
        self.surface = surface
        self.twin = m.twin.tolist()
        self.face = m.face.tolist()
        self.vert = m.vert.tolist()
        self.weight = m.weight.astype(np.int64).tolist()
        self.interior_vertex = m.interior_vertex_mask().tolist()
        self.faces = [m.face_cycle(f) for f in range(m.num_faces_total)]
        self.around = [m.vertex_cycle(v) for v in range(m.num_vertices)]

        size = m.num_faces_total
        self.in_region = [False] * size
        self.layer = [-1] * size
        self.label = [-1] * size
        self.parent_side = [-1] * size
        self.touched = [False] * m.num_vertices
        self.cost = [0] * m.num_vertices

        self.r = 0
        self.totals: List[int] = []
        self.label_totals: List[Dict[int, int]] = []
        self.area: List[Dict[int, int]] = [{}]
        self.pending: deque = deque()
        self.added_this_layer: List[int] = []
        self.tangency: Optional[Tangency] = None
        self.outcome: Optional[RewireOutcome] = None
        self.ops = 0
        self.discards = 0

        holes = m.hole_faces()
        self.label_total = {f: 0 for f in holes}
        for f in holes:
            self.in_region[f] = True
            self.layer[f] = 0
            self.label[f] = f
            for h in self.faces[f]:
                self.touched[self.vert[h]] = True
        for v in range(m.num_vertices):
            if self.touched[v]:
                self._set_cost(v)
        self.totals.append(sum(self.cost))
        self.label_totals.append(dict(self.label_total))
        self.added_this_layer = list(holes)
        self._next_layer()

    ###########################################################################
    # LOCAL BOOKKEEPING
    ###########################################################################

    def outside(self, g: int) -> bool:
        return not self.in_region[g]

    def _vertex_label(self, v: int) -> int:
        for h in self.around[v]:
            f = self.face[h]
            if self.in_region[f]:
                return self.label[f]
        return -1

    def _set_cost(self, v: int) -> None:
        """Crossings of the current curves at v: outside-outside edges around a vertex touching R"""
        cost = 0
        if any(self.in_region[self.face[h]] for h in self.around[v]):
            for h in self.around[v]:
                if self.outside(self.face[h]) and self.outside(self.face[self.twin[h]]):
                    cost += self.weight[h]
        self.cost[v] = cost
        label = self._vertex_label(v)
        if cost and label in self.label_total:
            self.label_total[label] += cost

    def _add_face(self, f: int, label: int, parent_side: int) -> None:
        verts = {self.vert[h] for h in self.faces[f]}
        for v in verts:
            if self.cost[v]:
                lbl = self._vertex_label(v)
                if lbl in self.label_total:
                    self.label_total[lbl] -= self.cost[v]
                self.cost[v] = 0
        self.in_region[f] = True
        self.layer[f] = self.r + 1
        self.label[f] = label
        self.parent_side[f] = parent_side
        self.added_this_layer.append(f)
        area = self.area[-1]
        for v in verts:
            if not self.touched[v]:
                self.touched[v] = True
                if self.interior_vertex[v]:
                    area[label] = area.get(label, 0) + 1
            self._set_cost(v)
        self.ops += len(self.faces[f])

    def _next_layer(self) -> None:
        frontier = set()
        for f in self.added_this_layer:
            for h in self.faces[f]:
                g = self.face[self.twin[h]]
                if self.outside(g):
                    frontier.add(g)
        self.pending = deque(sorted(frontier))
        self.added_this_layer = []
        self.area.append({})

    def runs(self, f: int) -> List[Tuple[bool, List[int]]]:
        """Sides of f grouped into alternating contact and gap runs, starting with a contact run"""
        sides = self.faces[f]
        contact = [self.in_region[self.face[self.twin[h]]] and self.face[self.twin[h]] != f for h in sides]
        k = len(sides)
        if all(contact):
            return [(True, list(sides))]
        start = next(i for i in range(k) if contact[i] and not contact[i - 1])
        runs: List[Tuple[bool, List[int]]] = []
        for i in range(k):
            j = (start + i) % k
            if runs and runs[-1][0] == contact[j]:
                runs[-1][1].append(sides[j])
            else:
                runs.append((contact[j], [sides[j]]))
        return runs

    def contact_arcs(self, f: int) -> List[Arc]:
        return [(tuple(sides), self.label[self.face[self.twin[sides[0]]]])
                for touching, sides in self.runs(f) if touching]

    def parent_arc(self, arcs: List[Arc]) -> int:
        """Index of an arc touching the previous layer"""
        for i, (sides, _) in enumerate(arcs):
            if any(self.layer[self.face[self.twin[h]]] == self.r for h in sides):
                return i
        return 0

    def parent_of(self, f: int) -> int:
        for h in self.faces[f]:
            g = self.face[self.twin[h]]
            if self.in_region[g] and self.layer[g] == self.r:
                return h
        return -1

    def attach_side(self, f: int) -> int:
        """Side of f across which some swept face lies; filled disks hang off it"""
        for h in self.faces[f]:
            if self.in_region[self.face[self.twin[h]]]:
                return h
        return -1

    ###########################################################################
    # GAP ANALYSIS
    ###########################################################################

    def gap_groups(self, f: int) -> Tuple[List[int], Dict[int, bool], List[List[int]]]:
        """Tandem flood fill of the complement of R + f from each gap between contact arcs.

        Returns the group root of every gap, whether each root group is a disk,
        and the faces of each group. Groups meeting each other merge. Filling
        stops once at most one group is still growing; that group is never
        reported as a disk.
        """
        gaps = [sides for touching, sides in self.runs(f) if not touching]
        count = len(gaps)
        root = list(range(count))
        members: List[List[int]] = [[] for _ in range(count)]
        queues: List[deque] = [deque() for _ in range(count)]
        owner: Dict[int, int] = {}

        def find(x: int) -> int:
            while root[x] != x:
                root[x] = root[root[x]]
                x = root[x]
            return x

        def claim(group: int, g: int) -> int:
            group = find(group)
            if g == f or self.in_region[g]:
                return group
            if g not in owner:
                owner[g] = group
                members[group].append(g)
                queues[group].append(g)
                return group
            other = find(owner[g])
            if other != group:
                root[group] = other
                members[other].extend(members[group])
                queues[other].extend(queues[group])
                members[group], queues[group] = [], deque()
            return other

        for i, gap in enumerate(gaps):
            for h in gap:
                claim(i, self.face[self.twin[h]])

        while True:
            active = [g for g in range(count) if find(g) == g and queues[g]]
            if len(active) <= 1:
                break
            for group in active:
                group = find(group)
                if not queues[group]:
                    continue
                u = queues[group].popleft()
                self.ops += 1
                for h in self.faces[u]:
                    group = claim(group, self.face[self.twin[h]])

        is_disk = {}
        for g in range(count):
            if find(g) == g:
                is_disk[g] = not queues[g] and self._is_disk(members[g])
        return [find(i) for i in range(count)], is_disk, members

    def _is_disk(self, faces: List[int]) -> bool:
        if not faces:
            return True
        verts, edges = set(), set()
        edge_id = self.surface.edge_id
        for g in faces:
            for h in self.faces[g]:
                verts.add(self.vert[h])
                edges.add(int(edge_id[h]))
        self.ops += len(edges)
        return len(verts) - len(edges) + len(faces) == 1


###############################################################################
# SWEEP OPERATIONS
###############################################################################

def _tangency_at(state: ShiftState, f: int) -> Optional[Tangency]:
    arcs = state.contact_arcs(f)
    if len(arcs) < 2:
        return None
    labels = tuple(sorted({lbl for _, lbl in arcs}))
    kind = 'same-curve' if len(labels) == 1 else 'different-curves'
    return Tangency(kind=kind, face=f, arcs=arcs, labels=labels)


def detect_tangency(state: ShiftState) -> Optional[Tangency]:
    """First pending face touching R along two or more arcs"""
    if state.tangency is not None:
        return state.tangency
    for f in state.pending:
        if state.outside(f):
            t = _tangency_at(state, f)
            if t is not None:
                return t
    return None


def shift_right(state: ShiftState) -> ShiftState:
    """Push every curve one face to the right, stopping at the first tangency"""
    if state.tangency is not None:
        raise TangencyPresent('resolve the pending tangency before shifting', face=state.tangency.face)
    while state.pending:
        f = state.pending[0]
        if state.in_region[f]:
            state.pending.popleft()
            continue
        t = _tangency_at(state, f)
        if t is not None:
            state.tangency = t
            return state
        state.pending.popleft()
        state._add_face(f, state.contact_arcs(f)[0][1], state.parent_of(f))
    if not state.added_this_layer:
        raise ComponentNotDecomposable('the sweep covered the surface without a tangency')
    state.r += 1
    state.totals.append(sum(state.cost))
    state.label_totals.append(dict(state.label_total))
    state._next_layer()
    return state


def rewire(state: ShiftState, t: Tangency) -> RewireOutcome:
    """Resolve a tangency: discard disks and continue, or report a split or merge"""
    f = t.face
    p = state.parent_arc(t.arcs)
    p_label = t.arcs[p][1]
    if t.kind == 'different-curves':
        x = next(i for i, (_, lbl) in enumerate(t.arcs) if lbl != p_label)
        state.outcome = RewireOutcome('merged', labels=(p_label, t.arcs[x][1]), arcs=(p, x))
        return state.outcome

    roots, is_disk, members = state.gap_groups(f)
    essential = [i for i, g in enumerate(roots) if not is_disk[g]]
    if len(essential) >= 2:
        # gap i lies between arc i and arc i + 1
        k = len(t.arcs)
        first = min((i - p) % k for i in essential)
        state.outcome = RewireOutcome('split', labels=(p_label,), arcs=(p, (p + first + 1) % k))
        return state.outcome

    state.pending.remove(f)
    state._add_face(f, p_label, state.parent_of(f))
    filled = 0
    for g in sorted({g for g in roots if is_disk[g]}):
        for face in members[g]:
            if state.outside(face):
                state._add_face(face, p_label, state.attach_side(face))
                filled += 1
    state.discards += 1
    log_event('contractible_discard', {'face': f, 'label': p_label, 'area': filled + 1, 'step': state.r})
    state.tangency = None
    state.outcome = RewireOutcome('continued', labels=(p_label,), filled=filled)
    return state.outcome


def choose_s(state: ShiftState, ell: int) -> int:
    """Largest step c <= r whose curves have total length at most ell"""
    if state.totals[0] > ell:
        raise InitialBoundaryTooLong(f'boundary length {state.totals[0]} exceeds {ell}',
                                     boundary=state.totals[0], ell=ell)
    return max(c for c, total in enumerate(state.totals[:state.r + 1]) if total <= ell)


###############################################################################
# PHASES
###############################################################################

def _region_mask(state: ShiftState, s: int, extra: Sequence[int] = ()) -> np.ndarray:
    mask = np.array([inside and layer <= s for inside, layer in zip(state.in_region, state.layer)], dtype=bool)
    mask[list(extra)] = True
    return mask


def _curves_with_offsets(state: ShiftState, inside: np.ndarray):
    """Curves of a region by label, and for every followed half-edge its (offset, order) on its curve"""
    phi = state.surface.phi.tolist()
    twin, face = state.twin, state.face
    ins = inside.tolist()
    by_label: Dict[int, List[int]] = {}
    where: Dict[int, Tuple[int, int]] = {}
    for start in range(len(twin)):
        if ins[face[start]] or not ins[face[twin[start]]] or start in where:
            continue
        crossings: List[int] = []
        h, order = start, 0
        while True:
            where[h] = (len(crossings), order)
            order += 1
            k = phi[h]
            while not ins[face[twin[k]]]:
                crossings.append(twin[k])
                k = phi[twin[k]]
            h = k
            if h == start:
                break
        by_label.setdefault(state.label[face[twin[start]]], crossings)
        state.ops += len(crossings) + order
    return by_label, where


def _lowest_side(state: ShiftState, arc: Arc) -> int:
    return min(arc[0], key=lambda h: state.layer[state.face[state.twin[h]]])


def _chain_up(state: ShiftState, side: int, s: int) -> Tuple[List[int], int, List[int]]:
    """Crossings from the step-s curve up to the tangency face through one contact side.

    Also returns the followed half-edge where the chain leaves the curve and
    the faces it passes through.
    """
    up: List[int] = []
    faces: List[int] = []
    cur = state.face[state.twin[side]]
    if state.layer[cur] <= s:
        return up, side, faces
    up.append(side)
    while True:
        faces.append(cur)
        ps = state.parent_side[cur]
        p = state.face[state.twin[ps]]
        if state.layer[p] <= s:
            up.reverse()
            return up, ps, faces
        up.append(ps)
        cur = p


def _cyclic_slice(seq: List[int], where: Dict[int, Tuple[int, int]], a: int, b: int) -> List[int]:
    ia, oa = where[a]
    ib, ob = where[b]
    if ob >= oa:
        return seq[ia:ib]
    return seq[ia:] + seq[:ib]


def _phase(state: ShiftState, s: int, phase: str) -> DecompositionStep:
    t, outcome = state.tangency, state.outcome
    curves, where = _curves_with_offsets(state, _region_mask(state, s))
    p, x = outcome.arcs
    up_p, end_p, _ = _chain_up(state, _lowest_side(state, t.arcs[p]), s)
    up_x, end_x, _ = _chain_up(state, _lowest_side(state, t.arcs[x]), s)
    twin = state.twin
    eta_px = up_p + [twin[h] for h in reversed(up_x)]
    eta_xp = up_x + [twin[h] for h in reversed(up_p)]

    delta: List[CrossCurve] = []
    delta_of_label: Dict[int, int] = {}
    for label in sorted(curves):
        if label not in outcome.labels:
            delta_of_label[label] = len(delta)
            delta.append(CrossCurve(tuple(curves[label])))
    if phase == 'split':
        gamma = curves[outcome.labels[0]]
        new = [_cyclic_slice(gamma, where, end_p, end_x) + eta_xp,
               _cyclic_slice(gamma, where, end_x, end_p) + eta_px]
    else:
        ga, gb = curves[outcome.labels[0]], curves[outcome.labels[1]]
        ia, ib = where[end_p][0], where[end_x][0]
        new = [ga[ia:] + ga[:ia] + eta_px + gb[ib:] + gb[:ib] + eta_xp]
    for seq in new:
        delta.append(CrossCurve(tuple(reduce_backtracks(seq, state.surface.twin))))

    return DecompositionStep(delta=delta, remainder=[], discarded=[], s=s, r=state.r, eta=eta_px,
                             phase=phase, totals=list(state.totals), boundary_before=state.totals[0],
                             boundary_after=0, delta_of_label=delta_of_label)


def splitting_phase(state: ShiftState, s: int) -> DecompositionStep:
    if state.outcome is None or state.outcome.kind != 'split':
        raise NotInSplitState('the last rewiring did not split a curve')
    return _phase(state, s, 'split')


def merging_phase(state: ShiftState, s: int) -> DecompositionStep:
    if state.outcome is None or state.outcome.kind != 'merged':
        raise NotInMergeState('the last rewiring did not merge two curves')
    return _phase(state, s, 'merge')


def _region_fallback(state: ShiftState, s: int) -> List[CrossCurve]:
    """Curves around R_s together with the faces eta passes through"""
    t = state.tangency
    faces = [t.face]
    for i in state.outcome.arcs:
        faces.extend(_chain_up(state, _lowest_side(state, t.arcs[i]), s)[2])
    curves = []
    for c, _ in interface_curves(state.surface, _region_mask(state, s, faces)):
        crossings = reduce_backtracks(list(c.crossings), state.surface.twin)
        if crossings:
            curves.append(CrossCurve(tuple(crossings)))
    return curves


###############################################################################
# ONE DECOMPOSITION STEP
###############################################################################

def component_classes(m: CombinatorialMap) -> List[Classification]:
    holes = np.zeros(m.num_components, dtype=np.int64)
    for f in m.hole_faces():
        holes[m.component[m.face_start(f)]] += 1
    return [classify_counts(int(g), int(b)) for g, b in zip(m.component_genus.tolist(), holes.tolist())]


def is_decomposable(c: Classification) -> bool:
    return c.boundary_count > 0 and not (c.is_disk or c.is_annulus or c.is_pants)


def _ledger(ok: bool, message: str, details: Dict, assert_bounds: bool) -> None:
    if ok:
        return
    log_event('ledger_violation', dict(details, message=message), violation=True)
    if assert_bounds:
        raise BoundViolation(message, **details)


def _kind(comp: CutComponent) -> Classification:
    return classify_counts(comp.surface.genus, comp.surface.num_holes)


def decompose_step(surface: CombinatorialMap, ell: int,
                   assert_bounds: bool = False) -> Tuple[DecompositionStep, ShiftState]:
    """Cut off one pair of pants and the annuli next to it"""
    for c in component_classes(surface):
        if not is_decomposable(c):
            raise ComponentNotDecomposable(f'component with genus {c.genus} and {c.boundary_count} holes',
                                           genus=c.genus, holes=c.boundary_count)
    state = ShiftState(surface)
    choose_s(state, ell)

    while True:
        shift_right(state)
        if state.tangency is not None and rewire(state, state.tangency).kind != 'continued':
            break

    s = choose_s(state, ell)
    step = splitting_phase(state, s) if state.outcome.kind == 'split' else merging_phase(state, s)
    try:
        components = cut_curve_system(surface, step.delta)
    except SurfaceError as exc:
        log_event('spliced_boundary_rejected', {'reason': str(exc), 's': s, 'r': state.r})
        step.delta = _region_fallback(state, s)
        step.fallback = True
        components = cut_curve_system(surface, step.delta)
    state.ops += surface.num_half_edges

    for comp in components:
        (step.discarded if () in comp.hole_curves else step.remainder).append(comp)
    pants = [c for c in step.discarded if _kind(c).is_pants]
    annuli = [c for c in step.discarded if _kind(c).is_annulus]
    if len(pants) != 1 or len(pants) + len(annuli) != len(step.discarded):
        raise LedgerViolation('swept side is not one pair of pants plus annuli',
                              pants=len(pants), annuli=len(annuli), pieces=len(step.discarded))
    if any(_kind(c).is_disk for c in step.remainder):
        raise LedgerViolation('remainder has a disk component')

    n = surface.n
    eta_length = int(surface.weight[step.eta].sum()) if step.eta else 0
    step.boundary_after = sum(c.length(surface) for c in step.delta)
    details = {'ell': ell, 'n': n, 's': s, 'r': state.r, 'eta': eta_length, 'boundary': step.boundary_after}
    if not step.fallback:
        _ledger(eta_length <= 2 * (state.r - s) + 1, '|eta| > 2(r-s)+1', details, assert_bounds)
        _ledger(ell * step.boundary_after <= ell * ell + 4 * n + 2 * ell, "|dS'| > ell + 4n/ell + 2",
                details, assert_bounds)
    _ledger((state.r - s) * ell <= n, '(r-s)*ell > n', details, assert_bounds)
    for c in range(1, state.r + 1):
        for label, length in state.label_totals[c].items():
            area = state.area[c].get(label, 0)
            _ledger(area >= length, 'swept area below curve length',
                    dict(details, step=c, label=label, area=area, length=length), assert_bounds)

    logger.debug(f"Step {step.phase}: s={s} r={state.r} |eta|={eta_length} "
                 f"boundary {step.boundary_before} -> {step.boundary_after}")
    return step, state


###############################################################################
# DRIVER
###############################################################################

def ell_sequence(C: float, n: int, rounds: int) -> List[int]:
    """ell_k = floor(C sqrt(k n)) for k = 1..rounds + 1"""
    return [int(math.floor(C * math.sqrt(k * n))) for k in range(1, rounds + 2)]


def recurrence_holds(C: float, n: int, rounds: int) -> bool:
    """ell_k + 4n/ell_k + 2 <= ell_(k+1) for every k up to rounds"""
    ells = ell_sequence(C, n, rounds)
    return all(a > 0 and a * a + 4 * n + 2 * a <= a * b for a, b in zip(ells, ells[1:]))


@dataclass
class PantsResult:
    curves: List[CrossCurve]
    C: float
    rounds: int
    ell: List[int]
    operations: int
    pants: int
    round_of_curve: List[int]
    fallback_rounds: List[int] = field(default_factory=list)
    escalations: int = 0

    @property
    def bound_constant(self) -> float:
        """Constant c with every curve at most c * sqrt(g n)"""
        return self.C * math.sqrt(2)


class _Slots:
    """Union-find over curve classes; each class keeps its shortest representative"""

    def __init__(self):
        self.root: List[int] = []
        self.best: List[Tuple[int, CrossCurve, int]] = []

    def add(self, length: int, curve: CrossCurve, round_no: int) -> int:
        self.root.append(len(self.root))
        self.best.append((length, curve, round_no))
        return len(self.root) - 1

    def find(self, x: int) -> int:
        while self.root[x] != x:
            self.root[x] = self.root[self.root[x]]
            x = self.root[x]
        return x

    def union(self, a: int, b: int) -> int:
        a, b = self.find(a), self.find(b)
        if a == b:
            return a
        keep, drop = (a, b) if self.best[a][0] <= self.best[b][0] else (b, a)
        self.root[drop] = keep
        return keep

    def representatives(self) -> List[Tuple[int, CrossCurve, int]]:
        return [self.best[x] for x in range(len(self.root)) if self.find(x) == x]


def _hole_slots(comp: CutComponent, slot_of_delta: List[int], slots: _Slots) -> np.ndarray:
    """Per half-edge of the component, the curve class of the hole it lies in (-1 off holes)"""
    m = comp.surface
    hole_slot = np.full(m.num_half_edges, -1, dtype=np.int64)
    for f, labels in zip(m.hole_faces(), comp.hole_curves):
        hole_slot[m.face == f] = slots.find(slot_of_delta[labels[0]])
    return hole_slot


def _complete_piece(piece: CombinatorialMap, lift: np.ndarray, host: CombinatorialMap) -> List[CrossCurve]:
    """Pants curves of one piece the sweep cannot handle, read back on the host"""
    curves = complete_genus_zero(piece, greedy_genus_zero_decomposition(piece))
    return [lift_curve(lift, host, c) for c in curves]


def _escalate(C: float, escalations: int, details: Dict) -> Tuple[float, int]:
    if escalations >= PantsConfig.MAX_ESCALATIONS:
        raise LedgerViolation(f'no constant up to {C} keeps the boundary under ell', C=C, **details)
    log_event('escalate_constant', dict(details, C=C))
    return C * 2, escalations + 1


def _attempt(s: CombinatorialMap, C: float, systole: Tuple[int, CrossCurve], assert_bounds: bool,
             budget: int, trace: Optional[TextIO], operations: int) -> PantsResult:
    """One full run of the rounds at a fixed constant.

    Raises InitialBoundaryTooLong, with the operations spent so far, as
    soon as some round starts with a boundary longer than its ell.
    """
    g, n = s.genus, s.n
    rounds = 2 * g - 2
    ells = ell_sequence(C, n, rounds)
    systole_length, systole_curve = systole

    slots = _Slots()
    slot_of_delta = [slots.add(systole_length, systole_curve, 0)]
    pieces = [(comp.surface, comp.parent, _hole_slots(comp, slot_of_delta, slots))
              for comp in cut_curve_system(s, [systole_curve])]
    operations += s.num_half_edges
    pants_count = 0
    round_no = 0
    fallback_rounds: List[int] = []

    while True:
        live = []
        for surface, lift, hole_slot in pieces:
            kind = component_classes(surface)[0]
            if kind.is_pants:
                pants_count += 1
            elif kind.is_annulus:
                first, *rest = sorted({int(x) for x in hole_slot[hole_slot >= 0]})
                for other in rest:
                    slots.union(first, other)
            elif kind.is_disk:
                raise LedgerViolation('a disk appeared among the pieces')
            else:
                live.append((surface, lift, hole_slot))
        if not live:
            break
        round_no += 1
        if round_no > rounds:
            raise LedgerViolation('more rounds than pairs of pants', rounds=round_no)
        ell = ells[round_no - 1]

        current = disjoint_union([p[0] for p in live]) if len(live) > 1 else live[0][0]
        lift = np.concatenate([p[1] for p in live])
        hole_slot = np.concatenate([p[2] for p in live])
        boundary = boundary_length(current)
        if boundary > ell:
            raise InitialBoundaryTooLong(f'round {round_no} starts with boundary {boundary} above {ell}',
                                         boundary=boundary, ell=ell, round=round_no, operations=operations)

        try:
            step, state = decompose_step(current, ell, assert_bounds=assert_bounds)
        except InitialBoundaryTooLong as exc:
            exc.details.update(round=round_no, operations=operations)
            raise
        except (BoundViolation, BudgetExceeded):
            raise
        except SurfaceError as exc:
            log_event('sweep_fallback', {'round': round_no, 'reason': type(exc).__name__, 'message': str(exc)})
            added = 0
            for surface, piece_lift, _ in live:
                kind = component_classes(surface)[0]
                curves = _complete_piece(surface, piece_lift, s)
                for curve in curves:
                    slots.add(curve.length(s), curve, round_no)
                pants_count += 2 * kind.genus + kind.boundary_count - 2
                operations += surface.num_half_edges * (len(curves) + 1)
                added += len(curves)
            if operations > budget:
                raise BudgetExceeded(f'{operations} operations exceed the budget {budget}',
                                     operations=operations, budget=budget)
            fallback_rounds.append(round_no)
            if trace is not None:
                trace.write(json.dumps({'round': round_no, 'ell': ell, 'phase': 'fallback',
                                        'reason': type(exc).__name__, 'curves': added}) + '\n')
            logger.info(f"Round {round_no}: sweep refused ({type(exc).__name__}), "
                        f"{len(live)} pieces completed directly with {added} curves")
            break

        operations += state.ops
        if operations > budget:
            raise BudgetExceeded(f'{operations} operations exceed the budget {budget}',
                                 operations=operations, budget=budget)

        slot_of_delta = [-1] * len(step.delta)
        for comp in step.discarded:
            m = comp.surface
            new = [labels[0] for labels in comp.hole_curves if labels]
            for d in new:
                curve = lift_curve(lift, s, step.delta[d])
                slot_of_delta[d] = slots.add(curve.length(s), curve, round_no)
            if m.num_holes == 2:
                # a Delta curve parallel to an old hole joins that hole's class
                f = next(f for f, labels in zip(m.hole_faces(), comp.hole_curves) if not labels)
                side = int(comp.parent[m.twin[m.face_start(f)]])
                slot_of_delta[new[0]] = slots.union(slot_of_delta[new[0]], int(hole_slot[current.twin[side]]))
            else:
                pants_count += 1
                if step.fallback:
                    continue
                for d in new:
                    length = step.delta[d].length(current)
                    _ledger(length <= ells[round_no], 'round curve above C sqrt((k+1) n)',
                            {'round': round_no, 'length': length}, assert_bounds)

        pieces = []
        for comp in step.remainder:
            par = comp.parent
            sub_lift = np.where(par >= 0, lift[np.maximum(par, 0)], -1)
            pieces.append((comp.surface, sub_lift, _hole_slots(comp, slot_of_delta, slots)))

        if trace is not None:
            trace.write(json.dumps({
                'round': round_no, 'ell': ell, 's': step.s, 'r': step.r, 'U': step.totals,
                'phase': step.phase, 'eta': len(step.eta), 'boundary_before': step.boundary_before,
                'boundary_after': step.boundary_after,
            }) + '\n')
        logger.info(f"Round {round_no}: {step.phase} at s={step.s}, r={step.r}, ell={ell}, "
                    f"boundary {step.boundary_before} -> {step.boundary_after}")

    reps = slots.representatives()
    curves = [curve for _, curve, _ in reps]
    if len(curves) != 3 * g - 3:
        raise LedgerViolation(f'expected {3 * g - 3} curves, found {len(curves)}')
    pants = verify_pants(s, curves)
    if pants != 2 * g - 2 or pants_count != 2 * g - 2:
        raise LedgerViolation(f'expected {2 * g - 2} pants, found {pants}', counted=pants_count)
    return PantsResult(curves=curves, C=C, rounds=round_no, ell=ells, operations=operations,
                       pants=pants, round_of_curve=[k for _, _, k in reps], fallback_rounds=fallback_rounds)


def pants_decomposition(s: CombinatorialMap, b: int = 0, C: Optional[float] = None,
                        assert_bounds: bool = False, budget: Optional[int] = None,
                        trace: Optional[TextIO] = None) -> PantsResult:
    """3g - 3 disjoint curves cutting a closed surface into pants.

    The constant is doubled until the ell recurrence holds and twice the
    systole fits under ell_1. A round whose boundary outgrows its ell
    doubles the constant again and restarts from the systole.
    """
    if s.num_holes or b:
        raise HasBoundary('pants_decomposition expects a closed surface')
    g = s.genus
    if g < 2:
        raise GenusTooSmall(f'genus {g} surfaces admit no pants decomposition', genus=g)
    start = time.perf_counter()
    n = s.n
    C = PantsConfig.C if C is None else C
    budget = PantsConfig.OP_BUDGET_K * g * n if budget is None else budget

    systole = shortest_noncontractible(s)
    escalations = 0
    while not (recurrence_holds(C, n, 3 * g - 3) and 2 * systole[0] <= ell_sequence(C, n, 0)[0]):
        C, escalations = _escalate(C, escalations, {'n': n, 'genus': g, 'reason': 'recurrence'})

    operations = 0
    while True:
        try:
            result = _attempt(s, C, systole, assert_bounds, budget, trace, operations)
            break
        except InitialBoundaryTooLong as exc:
            operations = exc.details.get('operations', operations)
            if trace is not None:
                trace.write(json.dumps({'round': exc.details.get('round', 0), 'ell': exc.details.get('ell'),
                                        'phase': 'escalate', 'C': C}) + '\n')
            C, escalations = _escalate(C, escalations, {
                'n': n, 'genus': g, 'reason': 'boundary', 'boundary': exc.details.get('boundary'),
                'ell': exc.details.get('ell'),
            })

    result.escalations = escalations
    logger.info(f"Pants decomposition: g={g}, n={n}, C={result.C}, {result.rounds} rounds, "
                f"{result.operations} operations, {escalations} escalations "
                f"({(time.perf_counter() - start) * 1000:.1f} ms)")
    return result
