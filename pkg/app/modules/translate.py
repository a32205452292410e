"""
Translate Module
Moves curves between the cross-metric surface G* and its primal
triangulation G, and measures primal walks in the equilateral metric.

On dualize(t) the faces of G* are the stars of the primal vertices and the
vertices of G* are the triangles. A crossing h of a dual curve leaves the
star of head(h) for the star of tail(h), so the curve is shadowed by the
primal half-edge twin(h) between the two star centers.
"""

import logging
from dataclasses import dataclass
from typing import Tuple, Union

from app.modules.combinatorial_map import CombinatorialMap, Triangulation, dualize
from app.modules.curves import CrossCurve, PrimalWalk, homology_class_z2, is_contractible, reduce_backtracks
from app.modules.systole import shortest_noncontractible
from app.utils.errors import DegenerateCurve, InvalidMapError, LedgerViolation

logger = logging.getLogger(__name__)

EQUILATERAL_SIDE = 2.0 / 3 ** 0.25


@dataclass(frozen=True)
class EquilateralLength:
    """Length in the metric giving every triangle unit area"""

    value: float

    def __float__(self) -> float:
        return self.value


def equilateral_length(w: Union[PrimalWalk, int]) -> EquilateralLength:
    edges = w if isinstance(w, int) else len(w)
    return EquilateralLength(EQUILATERAL_SIDE * edges)


def snap_to_primal(t: CombinatorialMap, c: CrossCurve, s: CombinatorialMap = None) -> PrimalWalk:
    """Closed walk in the graph of t homotopic to a curve on dualize(t)"""
    if not c.crossings:
        raise DegenerateCurve('curve crosses no edge; it lies inside one triangle')
    s = dualize(t) if s is None else s
    c.validate(s, face_simple=False)
    twin = t.twin
    route = [int(twin[h]) for h in c.crossings]
    walk = PrimalWalk(tuple(reduce_backtracks(route, twin)))
    if walk.edges:
        walk.validate(t)

    if len(walk) > 2 * c.length(s):
        raise LedgerViolation('snapped walk is more than twice the curve length',
                              walk=len(walk), curve=c.length(s))
    if s.num_holes == 0:
        if (homology_class_z2(s, walk) != homology_class_z2(s, c)).any():
            raise LedgerViolation('snapping changed the homology class')
    logger.debug(f"Snapped a {len(c)}-crossing curve to a {len(walk)}-edge walk")
    return walk


def walk_to_curve(t: CombinatorialMap, walk: PrimalWalk) -> CrossCurve:
    """Dual curve shadowing a primal closed walk"""
    twin = t.twin
    return CrossCurve(tuple(int(twin[h]) for h in walk.edges))


def primal_edge_width(t: Triangulation) -> Tuple[int, PrimalWalk]:
    """Shortest non-contractible closed walk in the primal graph"""
    if t.num_holes:
        raise InvalidMapError('primal edge-width expects a closed triangulation')
    s = dualize(t)
    length, curve = shortest_noncontractible(s)
    walk = snap_to_primal(t, curve, s)
    if is_contractible(s, walk_to_curve(t, walk)):
        raise LedgerViolation('snapped systole witness became contractible')
    return len(walk), walk
