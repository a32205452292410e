###############################################################################
# SURFACE LAB COMMAND LINE
# Computational topology on cross-metric surfaces: generation, systoles,
# pants decompositions, snapping and growth studies
###############################################################################

import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from app.api import analysis, bench, decomposition, generate
from app.utils.errors import SurfaceError
from app.utils.validation import error_response

logger = logging.getLogger(__name__)

###############################################################################
# APPLICATION CONFIGURATION
###############################################################################

def create_app() -> Dict[str, Any]:
    config = {
        'WORKERS': int(os.environ.get('SURFACE_WORKERS', os.cpu_count() or 1)),
        'PANTS_C': float(os.environ.get('SURFACE_PANTS_C', 8.0)),
        'ORACLE_BUDGET': int(os.environ.get('SURFACE_ORACLE_BUDGET', 2_000_000)),
        'OP_BUDGET_K': int(os.environ.get('SURFACE_OP_BUDGET_K', 400)),
        'LOG_LEVEL': os.environ.get('SURFACE_LOG_LEVEL', 'INFO').upper(),
        'SAMPLE_ATTEMPTS': int(os.environ.get('SURFACE_SAMPLE_ATTEMPTS', 10_000)),
    }

    ###############################################################################
    # LOGGING SETUP
    ###############################################################################

    logging.basicConfig(
        level=getattr(logging, config['LOG_LEVEL'], logging.INFO),
        format='%(asctime)s %(levelname)s: %(message)s',
        stream=sys.stderr
    )

    return config

###############################################################################
# COMMAND REGISTRATION
###############################################################################

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='surface-lab',
        description='Shortest cycles and short pants decompositions on cross-metric surfaces'
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    for group in (generate, analysis, decomposition, bench):
        group.register(subparsers)
    return parser

###############################################################################
# ERROR HANDLING
###############################################################################

def main(argv: Optional[List[str]] = None) -> int:
    config = create_app()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, config)
    except SurfaceError as e:
        logger.error(f"{e.__class__.__name__}: {e}")
        print(json.dumps(error_response(e)), file=sys.stderr)
        return e.exit_code
    except OSError as e:
        logger.error(f"File error: {e}")
        print(json.dumps({'error': 'OSError', 'message': str(e), 'exit_code': 3}), file=sys.stderr)
        return 3
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        return 1

###############################################################################
# APPLICATION STARTUP
###############################################################################

if __name__ == '__main__':
    sys.exit(main())
