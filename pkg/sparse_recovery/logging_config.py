"""Logging configuration for the toolkit."""
import logging
import sys
from typing import Optional

from sparse_recovery.settings import get_settings


def setup_logging(level: Optional[str] = None):
    """Configure toolkit logging.

    Records go to stderr; stdout is reserved for CSV/JSONL output.
    """
    level_name = (level or get_settings().log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stderr)
        ],
        force=True,
    )
    return None
