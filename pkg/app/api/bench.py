###############################################################################
# BENCH COMMAND
# Growth studies over random surfaces, fanned out to a worker pool
###############################################################################

import json
import os
import logging
from typing import Any, Dict, List

from app.modules.random_surfaces import RandomConfig, growth_study
from app.modules.systole import pruning_bound
from app.utils.errors import LedgerViolation
from app.utils.validation import require_valid, validate_path, validate_seed

logger = logging.getLogger(__name__)


def parse_n_values(text: str) -> List[int]:
    """'100,200,400' or a doubling range '100:3200'"""
    if ':' in text:
        lo, hi = (int(p) for p in text.split(':', 1))
        values = []
        while lo <= hi:
            values.append(lo)
            lo *= 2
        return values
    return [int(p) for p in text.split(',') if p.strip()]


def run_bench(args, config: Dict[str, Any]) -> int:
    require_valid(validate_seed(args.seed, required=True))
    for path in (args.csv, args.xlsx):
        if path:
            require_valid(validate_path(path, 'table', must_exist=False))

    n_values = parse_n_values(args.n_values)
    workers = args.workers or config['WORKERS']
    table, slope = growth_study(n_values, args.samples, args.measure, genus=args.genus,
                                seed=args.seed, workers=workers)

    if args.measure == 'edge_width' and not table.empty:
        bounds = [pruning_bound(n, g) for n, g in zip(table['n'], table['g'])]
        over = table[table['value'] > bounds]
        if not over.empty:
            raise LedgerViolation('edge-width above the pruning bound', rows=len(over))

    if args.csv:
        table.to_csv(args.csv, index=False)
    if args.xlsx:
        table.to_excel(args.xlsx, index=False, engine='openpyxl')
    logger.info(f"Bench {args.measure}: {len(table)} rows from {len(n_values)} sizes")
    print(json.dumps({
        'measure': args.measure,
        'rows': len(table),
        'slope': slope,
        'median_by_n': {int(n): float(v) for n, v in table.groupby('n')['value'].median().items()},
    }))
    return 0


def register(subparsers) -> None:
    bench = subparsers.add_parser('bench', help='growth study of a measure over random surfaces')
    bench.add_argument('--measure', default='edge_width', choices=sorted(RandomConfig.MEASURES))
    bench.add_argument('--n-values', default='100:3200', help="comma list or doubling range 'lo:hi'")
    bench.add_argument('--samples', type=int, default=50, help='samples per size')
    bench.add_argument('--genus', type=int, default=2)
    bench.add_argument('--seed', type=int, help='PRNG seed (required)')
    bench.add_argument('--workers', type=int, help=f'worker processes (default {os.cpu_count()})')
    bench.add_argument('--csv', help='output CSV path')
    bench.add_argument('--xlsx', help='output Excel path')
    bench.set_defaults(func=run_bench)
