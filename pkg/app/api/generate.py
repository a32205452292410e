###############################################################################
# GENERATE COMMANDS
# gen: named fixtures; random: sampled cross-metric surfaces
###############################################################################

import json
import logging
from typing import Any, Dict

from app.modules.fixtures import FIXTURE_NAMES, genus_zero_with_holes, named_fixture
from app.modules.random_surfaces import RandomConfig, RandomSurfaceSpec, random_surface
from app.modules.surface_io import write_map
from app.utils.validation import require_valid, validate_path, validate_seed

logger = logging.getLogger(__name__)


def run_gen(args, config: Dict[str, Any]) -> int:
    """Write a named fixture triangulation"""
    require_valid(validate_path(args.out, 'map', must_exist=False))
    t = named_fixture(args.name)
    write_map(t, args.out)
    logger.info(f"Wrote fixture {args.name} to {args.out}")
    print(json.dumps(dict(t.summary(), fixture=args.name, out=args.out)))
    return 0


def run_random(args, config: Dict[str, Any]) -> int:
    """Write a random cross-metric surface"""
    require_valid(validate_path(args.out, 'map', must_exist=False))
    require_valid(validate_seed(args.seed, required=True))
    if args.holes:
        s = genus_zero_with_holes(args.holes, seed=args.seed)
    else:
        spec = RandomSurfaceSpec(n=args.n, seed=args.seed, condition=args.condition,
                                 genus=args.genus, method=args.method)
        s = random_surface(spec, attempts=config['SAMPLE_ATTEMPTS'])
    write_map(s, args.out)
    logger.info(f"Wrote random surface to {args.out}")
    print(json.dumps(dict(s.summary(), seed=args.seed, out=args.out)))
    return 0


def register(subparsers) -> None:
    gen = subparsers.add_parser('gen', help='write a fixture triangulation',
                                description=f"Fixtures: {', '.join(sorted(FIXTURE_NAMES))}")
    gen.add_argument('name', help='tetrahedron, octahedron, k7-torus, k7-double, grid-torus(w,h), genus(g)-canonical')
    gen.add_argument('--out', required=True, help='output .cmap path')
    gen.set_defaults(func=run_gen)

    rnd = subparsers.add_parser('random', help='sample a random cross-metric surface')
    rnd.add_argument('--n', type=int, default=100, help='number of trivalent vertices (even)')
    rnd.add_argument('--seed', type=int, help='PRNG seed (required)')
    rnd.add_argument('--condition', default='connected', choices=sorted(RandomConfig.CONDITIONS))
    rnd.add_argument('--genus', type=int, help='genus for genus-exact and genus-min')
    rnd.add_argument('--method', default='configuration', choices=sorted(RandomConfig.METHODS))
    rnd.add_argument('--holes', type=int, default=0, help='sample a genus-0 surface with this many holes instead')
    rnd.add_argument('--out', required=True, help='output .cmap path')
    rnd.set_defaults(func=run_random)
