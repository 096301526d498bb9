#!/usr/bin/env python3
"""
Common utilities for the radar clutter geometry toolkit
Centralizes JSON I/O, seed derivation, logging setup and error formatting
"""

import hashlib
import json
import logging
import re
from pathlib import Path
from typing import Any, Dict

try:
    from .config import LOG_FORMAT, LOG_LEVEL
    from .errors import MalformedFile
except ImportError:
    from config import LOG_FORMAT, LOG_LEVEL
    from errors import MalformedFile

logger = logging.getLogger(__name__)


def setup_logging(quiet: bool = False, log_file: Path = None) -> None:
    """
    Configure root logging once for a CLI run

    Args:
        quiet: Only warnings and errors when True
        log_file: Optional file receiving the same records
    """
    handlers = [logging.StreamHandler()]
    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(
        level=logging.WARNING if quiet else LOG_LEVEL,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def derive_seed(master_seed: int, stage: str) -> int:
    """
    Derive a 64-bit stage seed from the master seed

    The seed is the first 8 bytes (big endian) of SHA-256("<master>:<stage>"),
    so each stage can be rerun in isolation with the same randomness.
    """
    digest = hashlib.sha256(f"{int(master_seed)}:{stage}".encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'big')


def safe_json_load(file_path: Path) -> Any:
    """
    Load a JSON file, turning decode failures into MalformedFile

    Args:
        file_path: Path to the JSON file

    Returns:
        Decoded JSON data
    """
    file_path = Path(file_path)
    if not file_path.exists():
        raise MalformedFile("file not found", path=file_path)
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise MalformedFile(f"JSON error: {e.msg}", path=file_path, line=e.lineno, column=e.colno) from e


def safe_json_save(data: Any, file_path: Path) -> bool:
    """
    Save JSON data securely

    Args:
        data: Data to save
        file_path: Destination path

    Returns:
        True if successful, False otherwise
    """
    try:
        # Create parent directory if necessary
        file_path = Path(file_path)
        file_path.parent.mkdir(parents=True, exist_ok=True)

        with open(file_path, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=2, ensure_ascii=False)
            f.write("\n")
        return True
    except (OSError, TypeError, ValueError) as e:
        logger.error(f"❌ Error saving {file_path}: {e}")
        return False


def format_file_size(size_bytes: int) -> str:
    """Artifact size for log lines: exact bytes below 1 KB, one decimal above."""
    if size_bytes < 1024:
        return f"{int(size_bytes)} B"
    size = float(size_bytes)
    for unit in ['KB', 'MB', 'GB']:
        size /= 1024.0
        if size < 1024.0:
            return f"{size:.1f} {unit}"
    return f"{size / 1024.0:.1f} TB"


def get_file_stats(file_path: Path) -> Dict[str, Any]:
    """
    Size of a written artifact

    Returns:
        {'exists': True, 'size_bytes', 'size_formatted'} or
        {'exists': False, 'error'} when the path cannot be read
    """
    try:
        stat = Path(file_path).stat()
    except OSError as e:
        return {'exists': False, 'error': clean_error_message(e)}
    return {
        'exists': True,
        'size_bytes': stat.st_size,
        'size_formatted': format_file_size(stat.st_size),
    }


def clean_error_message(error: Any, max_length: int = 200) -> str:
    """
    One-line error message for failure reports

    Toolkit errors keep their own message; other exceptions (OSError,
    LinAlgError) are prefixed with their type. Whitespace is collapsed and
    the result truncated to max_length.
    """
    if not error:
        return "Unknown error"

    cleaned = re.sub(r'\s+', ' ', str(error)).strip()
    if isinstance(error, BaseException) and not getattr(error, 'category', None):
        cleaned = f"{type(error).__name__}: {cleaned}" if cleaned else type(error).__name__

    if len(cleaned) > max_length:
        cleaned = cleaned[:max_length - 3] + "..."
    return cleaned
