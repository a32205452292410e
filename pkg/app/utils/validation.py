###############################################################################
# INPUT VALIDATION AND EVENT LOGGING
# Path, seed and size checks for command inputs, plus structured event records
###############################################################################

import os
import re
import json
import logging
from datetime import datetime
from typing import Any, Dict, Optional

from app.utils.errors import InvalidMapError, SurfaceError

logger = logging.getLogger(__name__)


class ValidationConfig:
    """Validation constants shared by every command"""

    ALLOWED_EXTENSIONS = {
        'map': ['.cmap'],
        'curves': ['.curves'],
        'table': ['.csv', '.xlsx'],
        'trace': ['.jsonl'],
    }

    MAX_PATH_LENGTH = 4096
    MAX_FILE_SIZE = 200 * 1024 * 1024  # 200MB
    MAX_HALF_EDGES = 50_000_000
    MAX_SEED = 2 ** 64 - 1

    FORBIDDEN_PATTERNS = [
        r'\x00',  # NULL bytes
        r'[\x01-\x1f\x7f]',  # Control characters
    ]


def validate_path(path: str, kind: str, must_exist: bool = True) -> Dict[str, Any]:
    """Check an input or output path against the allowed extensions for its kind"""
    if not path:
        return {'valid': False, 'error': 'Path is required'}

    if len(path) > ValidationConfig.MAX_PATH_LENGTH:
        return {'valid': False, 'error': f'Path too long (max {ValidationConfig.MAX_PATH_LENGTH} chars)'}

    for pattern in ValidationConfig.FORBIDDEN_PATTERNS:
        if re.search(pattern, path):
            return {'valid': False, 'error': 'Path contains forbidden characters'}

    allowed = ValidationConfig.ALLOWED_EXTENSIONS.get(kind)
    if allowed is None:
        return {'valid': False, 'error': f'Unknown file kind: {kind}'}
    ext = os.path.splitext(path)[1].lower()
    if ext not in allowed:
        return {'valid': False, 'error': f'Expected one of {allowed}, got {ext or "no extension"}'}

    if must_exist:
        if not os.path.isfile(path):
            return {'valid': False, 'error': f'File not found: {path}'}
        size = os.path.getsize(path)
        if size > ValidationConfig.MAX_FILE_SIZE:
            return {'valid': False, 'error': f'File too large ({size} bytes)'}

    return {'valid': True}


def validate_seed(seed: Optional[int], required: bool = False) -> Dict[str, Any]:
    """Seeds are unsigned 64-bit integers"""
    if seed is None:
        if required:
            return {'valid': False, 'error': '--seed is required for reproducible runs'}
        return {'valid': True}
    if seed < 0 or seed > ValidationConfig.MAX_SEED:
        return {'valid': False, 'error': f'Seed out of range [0, {ValidationConfig.MAX_SEED}]'}
    return {'valid': True}


def validate_half_edge_count(count: int) -> Dict[str, Any]:
    if count <= 0 or count % 2:
        return {'valid': False, 'error': f'Half-edge count must be positive and even, got {count}'}
    if count > ValidationConfig.MAX_HALF_EDGES:
        return {'valid': False, 'error': f'Too many half-edges ({count})'}
    return {'valid': True}


def require_valid(check: Dict[str, Any], error_cls=InvalidMapError) -> None:
    """Raise when a validate_* check failed"""
    if not check['valid']:
        raise error_cls(check['error'])


def error_response(error: SurfaceError) -> Dict[str, Any]:
    """Structured error record printed to stderr by the CLI"""
    record = error.to_dict()
    record['timestamp'] = datetime.now().isoformat()
    return record


def log_event(event_type: str, details: Dict[str, Any], violation: bool = False) -> None:
    """Structured event logging; violations go out at WARNING level"""
    log_entry = {
        'event_type': event_type,
        'timestamp': datetime.now().isoformat(),
        'details': {k: v if isinstance(v, (int, float, bool, str, type(None))) else str(v)
                    for k, v in details.items()},
    }
    if violation:
        logger.warning(f"EVENT: {json.dumps(log_entry)}")
    else:
        logger.info(f"EVENT: {json.dumps(log_entry)}")
