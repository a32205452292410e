"""
Surface file formats.

.cmap     header `cmap 1 <num_halfedges> <num_boundary_faces>`, one `<id> <twin> <next>`
          line per half-edge, then one incident half-edge per boundary face
.curves   header `curves 1 <k>`, one `<length> <edge id> <side bit> ...` line per curve;
          side 0 enters through the smaller half-edge of the edge, side 1 through the larger
"""

import logging
from typing import List, Sequence, TextIO, Union

import numpy as np

from app.modules.combinatorial_map import CombinatorialMap, CrossMetricSurface, Triangulation, build_map
from app.modules.curves import CrossCurve, PrimalWalk
from app.utils.errors import CurveFormatError, MapFormatError
from app.utils.validation import validate_half_edge_count

logger = logging.getLogger(__name__)

PathOrFile = Union[str, TextIO]


def _read_lines(source: PathOrFile) -> List[str]:
    if isinstance(source, str):
        with open(source, 'r') as f:
            text = f.read()
    else:
        text = source.read()
    return [line for line in text.split('\n') if line.strip()]


def _write_text(target: PathOrFile, text: str) -> None:
    if isinstance(target, str):
        with open(target, 'w', newline='\n') as f:
            f.write(text)
    else:
        target.write(text)


###############################################################################
# .cmap
###############################################################################

def format_map(m: CombinatorialMap) -> str:
    holes = m.hole_faces()
    lines = [f'cmap 1 {m.num_half_edges} {len(holes)}']
    for h, (t, n) in enumerate(zip(m.twin.tolist(), m.nxt.tolist())):
        lines.append(f'{h} {t} {n}')
    for f in holes:
        lines.append(str(m.face_start(f)))
    return '\n'.join(lines) + '\n'


def write_map(m: CombinatorialMap, target: PathOrFile) -> None:
    _write_text(target, format_map(m))


def read_map(source: PathOrFile, cls=CombinatorialMap) -> CombinatorialMap:
    lines = _read_lines(source)
    if not lines:
        raise MapFormatError('empty map file')
    header = lines[0].split()
    if len(header) != 4 or header[0] != 'cmap' or header[1] != '1':
        raise MapFormatError(f'bad header: {lines[0]!r}')
    try:
        size, holes = int(header[2]), int(header[3])
    except ValueError:
        raise MapFormatError(f'bad header counts: {lines[0]!r}')
    check = validate_half_edge_count(size)
    if not check['valid']:
        raise MapFormatError(check['error'])
    if len(lines) != 1 + size + holes:
        raise MapFormatError(f'expected {size + holes} body lines, found {len(lines) - 1}')

    twin = np.empty(size, dtype=np.int64)
    nxt = np.empty(size, dtype=np.int64)
    seen = np.zeros(size, dtype=bool)
    for lineno, line in enumerate(lines[1:1 + size], start=2):
        parts = line.split()
        if len(parts) != 3:
            raise MapFormatError(f'line {lineno}: expected "<id> <twin> <next>"')
        try:
            h, t, n = (int(p) for p in parts)
        except ValueError:
            raise MapFormatError(f'line {lineno}: non-integer field')
        if not 0 <= h < size or seen[h]:
            raise MapFormatError(f'line {lineno}: bad or repeated half-edge id {h}')
        seen[h] = True
        twin[h], nxt[h] = t, n

    reps = []
    for lineno, line in enumerate(lines[1 + size:], start=2 + size):
        try:
            reps.append(int(line.split()[0]))
        except ValueError:
            raise MapFormatError(f'line {lineno}: bad boundary face representative')
    return build_map(twin, nxt, reps, cls=cls)


def read_surface(source: PathOrFile) -> CrossMetricSurface:
    return read_map(source, cls=CrossMetricSurface)


###############################################################################
# .curves
###############################################################################

def format_curves(s: CombinatorialMap, curves: Sequence[CrossCurve]) -> str:
    edge_id = s.edge_id
    twin = s.twin
    lines = [f'curves 1 {len(curves)}']
    for c in curves:
        fields = [str(len(c))]
        for h in c.crossings:
            fields.append(str(int(edge_id[h])))
            fields.append('0' if h < twin[h] else '1')
        lines.append(' '.join(fields))
    return '\n'.join(lines) + '\n'


def write_curves(s: CombinatorialMap, curves: Sequence[CrossCurve], target: PathOrFile) -> None:
    _write_text(target, format_curves(s, curves))


def read_curves(source: PathOrFile, s: CombinatorialMap) -> List[CrossCurve]:
    lines = _read_lines(source)
    if not lines:
        raise CurveFormatError('empty curves file')
    header = lines[0].split()
    if len(header) != 3 or header[0] != 'curves' or header[1] != '1':
        raise CurveFormatError(f'bad header: {lines[0]!r}')
    try:
        count = int(header[2])
    except ValueError:
        raise CurveFormatError(f'bad curve count: {header[2]!r}')
    if count < 0:
        raise CurveFormatError(f'negative curve count: {count}')
    if len(lines) != 1 + count:
        raise CurveFormatError(f'expected {count} curves, found {len(lines) - 1}')

    # edge id -> smaller half-edge
    low = np.flatnonzero(np.arange(s.num_half_edges) < s.twin)
    curves = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            values = [int(p) for p in line.split()]
        except ValueError:
            raise CurveFormatError(f'line {lineno}: non-integer field')
        if not values or len(values) != 1 + 2 * values[0]:
            raise CurveFormatError(f'line {lineno}: length does not match the crossing list')
        crossings = []
        for e, side in zip(values[1::2], values[2::2]):
            if not 0 <= e < len(low) or side not in (0, 1):
                raise CurveFormatError(f'line {lineno}: bad crossing ({e}, {side})')
            h = int(low[e])
            crossings.append(h if side == 0 else int(s.twin[h]))
        curve = CrossCurve(tuple(crossings))
        try:
            curve.validate(s, face_simple=False)
        except Exception as exc:
            raise CurveFormatError(f'line {lineno}: {exc}')
        curves.append(curve)
    return curves


def format_walk(t: CombinatorialMap, walk: PrimalWalk) -> str:
    """Primal walk as its edge-id list, prefixed by the length"""
    edge_id = t.edge_id
    return ' '.join([str(len(walk))] + [str(int(edge_id[h])) for h in walk.edges]) + '\n'


def read_input(path: str, cross_metric: bool = False) -> CombinatorialMap:
    """Map from a command-line path: a closed all-triangle map is read as a triangulation"""
    m = read_map(path)
    if not cross_metric and m.num_holes == 0 and m.is_triangulation():
        return Triangulation(m.twin, m.nxt, hole=m.hole)
    return CrossMetricSurface(m.twin, m.nxt, hole=m.hole)
