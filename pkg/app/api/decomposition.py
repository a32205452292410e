###############################################################################
# DECOMPOSITION COMMANDS
# pants: short pants decompositions; genus0: logarithmic-multiplicity pairing
###############################################################################

import json
import math
import logging
from typing import Any, Dict, Optional

import pandas as pd

from app.modules.combinatorial_map import CombinatorialMap, Triangulation, dualize
from app.modules.fixtures import genus_zero_with_holes
from app.modules.genus_zero import (
    complete_genus_zero, genus_zero_row, greedy_genus_zero_decomposition, multiplicity, pairing_decomposition,
)
from app.modules.pants import pants_decomposition
from app.modules.random_surfaces import grown_surface, nearest_grown_n
from app.modules.surface_io import read_input, write_curves
from app.utils.validation import require_valid, validate_path, validate_seed

logger = logging.getLogger(__name__)


def _surface(args) -> Optional[CombinatorialMap]:
    if args.path:
        require_valid(validate_path(args.path, 'map'))
        m = read_input(args.path, cross_metric=args.cross_metric)
        return dualize(m) if isinstance(m, Triangulation) else m
    require_valid(validate_seed(args.seed, required=True))
    return None


def run_pants(args, config: Dict[str, Any]) -> int:
    s = _surface(args)
    if s is None:
        s = grown_surface(nearest_grown_n(args.random_n, args.genus), args.genus, args.seed)
    g, n = s.genus, s.n

    if args.method == 'genus-zero':
        curves = complete_genus_zero(s, greedy_genus_zero_decomposition(s))
        bound_constant = None
    else:
        trace = None
        if args.trace:
            require_valid(validate_path(args.trace, 'trace', must_exist=False))
            trace = open(args.trace, 'w')
        try:
            result = pants_decomposition(s, C=config['PANTS_C'], assert_bounds=args.assert_paper_bounds,
                                         budget=args.budget or config['OP_BUDGET_K'] * g * n, trace=trace)
        finally:
            if trace is not None:
                trace.close()
        curves = result.curves
        bound_constant = result.bound_constant

    if args.out:
        require_valid(validate_path(args.out, 'curves', must_exist=False))
        write_curves(s, curves, args.out)
    lengths = [c.length(s) for c in curves]
    summary = {
        'g': g,
        'n': n,
        'curves': len(curves),
        'total_length': sum(lengths),
        'max_length': max(lengths, default=0),
        'multiplicity': multiplicity(s, curves),
    }
    if bound_constant is not None:
        bound = bound_constant * math.sqrt(g * n)
        summary['C'] = round(bound_constant, 4)
        summary['bound'] = round(bound, 3)
        summary['bound_satisfied'] = summary['max_length'] <= bound
    print(json.dumps(summary))
    return 0


def run_genus0(args, config: Dict[str, Any]) -> int:
    s = _surface(args)
    if s is None:
        s = genus_zero_with_holes(args.holes, seed=args.seed)
    if args.csv:
        require_valid(validate_path(args.csv, 'table', must_exist=False))
        row = genus_zero_row(s)
        pd.DataFrame([row]).to_csv(args.csv, index=False)
    curves = pairing_decomposition(s)
    if args.out:
        require_valid(validate_path(args.out, 'curves', must_exist=False))
        write_curves(s, curves, args.out)
    print(json.dumps({
        'b': s.num_holes,
        'n': s.n,
        'curves': len(curves),
        'multiplicity': multiplicity(s, curves),
        'total_length': sum(c.length(s) for c in curves),
    }))
    return 0


def register(subparsers) -> None:
    pants = subparsers.add_parser('pants', help='short pants decomposition of a closed surface')
    pants.add_argument('path', nargs='?', help='.cmap file (triangulations are dualized)')
    pants.add_argument('--cross-metric', action='store_true', help='read the map as G* even if all faces are triangles')
    pants.add_argument('--random-n', type=int, default=500, help='size of a sampled surface when no path is given')
    pants.add_argument('--genus', type=int, default=2, help='genus of a sampled surface')
    pants.add_argument('--seed', type=int, help='PRNG seed for a sampled surface')
    pants.add_argument('--method', default='sweep', choices=['sweep', 'genus-zero'])
    pants.add_argument('--assert-paper-bounds', action='store_true', help='turn ledger inequalities into failures')
    pants.add_argument('--budget', type=int, help='elementary operation budget (default K g n)')
    pants.add_argument('--trace', help='JSON-lines trace of every decomposition step')
    pants.add_argument('--out', help='output .curves path')
    pants.set_defaults(func=run_pants)

    g0 = subparsers.add_parser('genus0', help='pairing decomposition of a genus-0 surface with holes')
    g0.add_argument('path', nargs='?', help='.cmap file with holes')
    g0.add_argument('--cross-metric', action='store_true', help='read the map as G* even if all faces are triangles')
    g0.add_argument('--holes', type=int, default=8, help='hole count of a sampled surface when no path is given')
    g0.add_argument('--seed', type=int, help='PRNG seed for a sampled surface')
    g0.add_argument('--csv', help='CSV row b,n,multiplicity,total_length,time_ms')
    g0.add_argument('--out', help='output .curves path')
    g0.set_defaults(func=run_genus0)
