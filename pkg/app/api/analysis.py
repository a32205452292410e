###############################################################################
# ANALYSIS COMMANDS
# info, edgewidth and snap
###############################################################################

import json
import logging
from typing import Any, Dict

import pandas as pd

from app.modules.combinatorial_map import Triangulation, dualize
from app.modules.curves import PrimalWalk
from app.modules.surface_io import format_curves, format_walk, read_curves, read_input, write_curves
from app.modules.systole import brute_force_oracle, shortest_noncontractible, systole_report
from app.modules.translate import equilateral_length, snap_to_primal
from app.utils.errors import InvalidMapError, LedgerViolation
from app.utils.validation import require_valid, validate_path

logger = logging.getLogger(__name__)


def _load(args):
    require_valid(validate_path(args.path, 'map'))
    return read_input(args.path, cross_metric=args.cross_metric)


def run_info(args, config: Dict[str, Any]) -> int:
    m = _load(args)
    info = m.summary()
    info['kind'] = 'triangulation' if isinstance(m, Triangulation) else 'cross-metric'
    info['trivalent'] = m.is_trivalent()
    if isinstance(m, Triangulation):
        info['n_identity'] = m.n == 2 * m.num_vertices + 4 * m.genus - 4
    print(json.dumps(info))
    return 0


def _format_witness(m, witness) -> str:
    if isinstance(witness, PrimalWalk):
        return format_walk(m, witness)
    return format_curves(m, [witness]).split('\n', 1)[1]


def run_edgewidth(args, config: Dict[str, Any]) -> int:
    m = _load(args)
    if args.report:
        report = systole_report(m)
        row = report.to_row()
        if args.csv:
            require_valid(validate_path(args.csv, 'table', must_exist=False))
            pd.DataFrame([row]).to_csv(args.csv, index=False)
        print(json.dumps(row))
        return 0

    length, witness = shortest_noncontractible(m)
    if args.oracle:
        budget = args.budget or config['ORACLE_BUDGET']
        found = brute_force_oracle(m, 'noncontractible', budget=budget)
        if found is None or found[0] != length:
            raise LedgerViolation('oracle disagrees with the pruned search',
                                  pruned=length, oracle=None if found is None else found[0])
        logger.info(f"Oracle confirmed edge-width {length}")
    if args.out and not isinstance(witness, PrimalWalk):
        require_valid(validate_path(args.out, 'curves', must_exist=False))
        write_curves(m, [witness], args.out)
    print(length)
    print(_format_witness(m, witness), end='')
    return 0


def run_snap(args, config: Dict[str, Any]) -> int:
    require_valid(validate_path(args.path, 'map'))
    require_valid(validate_path(args.curves, 'curves'))
    t = read_input(args.path)
    if not isinstance(t, Triangulation):
        raise InvalidMapError('snap expects a closed triangulation')
    s = dualize(t)
    for curve in read_curves(args.curves, s):
        walk = snap_to_primal(t, curve, s)
        logger.debug(f"Curve of length {curve.length(s)} -> walk of {len(walk)} edges, "
                     f"equilateral length {float(equilateral_length(walk)):.4f}")
        print(format_walk(t, walk), end='')
    return 0


def register(subparsers) -> None:
    info = subparsers.add_parser('info', help='counts, genus and boundary of a map')
    info.add_argument('path', help='.cmap file')
    info.add_argument('--cross-metric', action='store_true', help='read the map as G* even if all faces are triangles')
    info.set_defaults(func=run_info)

    ew = subparsers.add_parser('edgewidth', help='shortest non-contractible cycle')
    ew.add_argument('path', help='.cmap file')
    ew.add_argument('--cross-metric', action='store_true', help='read the map as G* even if all faces are triangles')
    ew.add_argument('--report', action='store_true', help='edge-width, non-separating and splitting widths')
    ew.add_argument('--oracle', action='store_true', help='confirm with the unpruned search')
    ew.add_argument('--budget', type=int, help='cycle budget for --oracle')
    ew.add_argument('--csv', help='CSV path for --report')
    ew.add_argument('--out', help='write the G* witness as a .curves file')
    ew.set_defaults(func=run_edgewidth)

    snap = subparsers.add_parser('snap', help='snap dual curves to primal closed walks')
    snap.add_argument('path', help='triangulation .cmap')
    snap.add_argument('curves', help='.curves file on the dual of the triangulation')
    snap.set_defaults(func=run_snap)
