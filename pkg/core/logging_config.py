import logging
import logging.handlers
from pathlib import Path
from typing import Any, Mapping, Optional

from rich.console import Console
from rich.logging import RichHandler

DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Handlers installed by configure_logging, removed again on reconfiguration
_installed_handlers: list = []


def configure_logging(
    section: Optional[Mapping[str, Any]] = None, console: Optional[Console] = None
) -> logging.Logger:
    """
    Configure the root logger from the ``logging`` config section.

    Args:
        section: Mapping with ``level``, ``format``, ``file``, ``max_file_size``
            and ``backup_count``
        console: Rich console for the terminal handler (stderr by default)

    Returns:
        The configured root logger
    """
    section = dict(section or {})
    level = str(section.get("level", "INFO")).upper()
    root = logging.getLogger()

    for handler in _installed_handlers:
        root.removeHandler(handler)
        handler.close()
    _installed_handlers.clear()

    console_handler = RichHandler(
        console=console or Console(stderr=True),
        show_path=False,
        rich_tracebacks=True,
    )
    console_handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    _installed_handlers.append(console_handler)

    log_file = section.get("file")
    if log_file:
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            path,
            maxBytes=int(section.get("max_file_size", 10 * 1024 * 1024)),
            backupCount=int(section.get("backup_count", 5)),
            encoding="utf-8",
        )
        file_handler.setFormatter(
            logging.Formatter(section.get("format") or DEFAULT_FORMAT)
        )
        _installed_handlers.append(file_handler)

    for handler in _installed_handlers:
        root.addHandler(handler)
    root.setLevel(level)

    # matplotlib's font manager is chatty at debug level
    logging.getLogger("matplotlib").setLevel(max(root.level, logging.INFO))
    return root
