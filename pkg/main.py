"""
Dilute Bose Gas Toolkit - Main Entry Point
Command-line access to the scattering, lattice, Bogoliubov and Monte Carlo solvers.
"""
import sys
import logging
import traceback
from pathlib import Path
from typing import Optional, Sequence

from config import config
from services import ServiceRegistry
from ui.cli import build_parser, dispatch

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: Optional[int] = None, log_file: Optional[str] = None):
    """Setup logging configuration: stderr always, a file when requested."""
    if level is None:
        level = getattr(logging, str(config.get("logging", "level")).upper(), logging.WARNING)
    log_file = log_file or config.get("logging", "file")
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(str(path)))

    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)


def verbosity_level(verbose: int) -> Optional[int]:
    """-v selects INFO, -vv DEBUG; no flag defers to the configured level."""
    if verbose >= 2:
        return logging.DEBUG
    if verbose == 1:
        return logging.INFO
    return None


def cleanup_services():
    """Clean up and stop all services."""
    try:
        ServiceRegistry().stop_all()
        logger.info("All services stopped successfully")
    except Exception as e:
        logger.error(f"Error during service cleanup: {e}")


def exception_handler(exctype, value, tb):
    """Global exception handler to log unhandled exceptions."""
    logger.critical("Unhandled exception:", exc_info=(exctype, value, tb))
    traceback.print_exception(exctype, value, tb)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Application entry point."""
    args = build_parser().parse_args(argv)
    setup_logging(verbosity_level(getattr(args, "verbose", 0)), getattr(args, "log_file", None))
    sys.excepthook = exception_handler
    logger.info(f"Starting bosegas {getattr(args, 'subcommand', None) or ''}".rstrip())

    try:
        return dispatch(args)
    finally:
        cleanup_services()


if __name__ == '__main__':
    sys.exit(main())
