import logging
from pathlib import Path
from typing import Optional

from .constants import DEFAULT_LOG_DIR, LOG_FILENAME


# Configure logging
def setup_logging(debug: bool = False, log_dir: Optional[Path] = None) -> None:
    """
    Setup logging configuration.

    Records go to stderr and to ``<log_dir>/splitstep.log``; stdout is left
    to command output so that it stays byte-deterministic.

    Args:
        debug (bool): Log at DEBUG level instead of INFO.
        log_dir (Optional[Path]): Directory for the log file. Defaults to ./logs.
    """
    log_dir = Path(log_dir) if log_dir is not None else Path.cwd() / DEFAULT_LOG_DIR
    log_dir.mkdir(parents=True, exist_ok=True)

    log_file = log_dir / LOG_FILENAME

    level = logging.DEBUG if debug else logging.INFO
    format_string = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

    # Clear any existing handlers to avoid duplicates
    logging.getLogger().handlers.clear()

    logging.basicConfig(
        level=level,
        format=format_string,
        handlers=[
            logging.StreamHandler(),
            logging.FileHandler(log_file, encoding="utf-8")
        ]
    )

    if debug:
        logging.getLogger().info(f"Debug logging enabled. Log file: {log_file}")
