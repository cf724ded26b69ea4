"""Utility functions"""
import logging
import os
import tempfile
from contextlib import contextmanager
from logging.handlers import RotatingFileHandler
from typing import Iterator, IO


def setup_logging(config) -> logging.Logger:
    """Setup logging configuration"""
    log_dir = os.path.dirname(config.logging.log_file)
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)

    logging.basicConfig(
        level=getattr(logging, config.logging.level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            RotatingFileHandler(config.logging.log_file,
                                maxBytes=config.logging.max_file_size,
                                backupCount=config.logging.backup_count),
            logging.StreamHandler()
        ],
        force=True
    )

    return logging.getLogger(__name__)


def create_output_directory(path: str) -> bool:
    """Create the parent directory of an output file if it doesn't exist"""
    directory = os.path.dirname(path)
    if not directory:
        return True
    try:
        os.makedirs(directory, exist_ok=True)
        return True
    except OSError:
        return False


@contextmanager
def atomic_write(path: str, mode: str = 'wb') -> Iterator[IO]:
    """Write through a temporary file in the target directory, renamed on success"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, temporary = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.basename(path))
    try:
        with os.fdopen(handle, mode) as stream:
            yield stream
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.remove(temporary)
        raise


def format_number(value: float, decimals: int = 2) -> str:
    """Scientific notation as used in convergence tables"""
    if value is None or value != value:
        return "--"
    return f"{value:.{decimals}E}"


def format_rate(value: float) -> str:
    if value is None or value != value:
        return "--"
    return f"{value:.2f}"
