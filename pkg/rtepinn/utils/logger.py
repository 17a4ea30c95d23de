#!/usr/bin/env python3
"""
Logging utility for rtepinn
Console and rotating-file logging with structured training, solver and experiment events
"""

import logging
import logging.handlers
from pathlib import Path
from typing import Optional

CONSOLE_FORMAT = '%(asctime)s | %(levelname)-8s | %(message)s'
FILE_FORMAT = '%(asctime)s | %(levelname)-8s | %(name)s | %(funcName)s:%(lineno)d | %(message)s'

_SIZE_UNITS = {'KB': 1024, 'MB': 1024 ** 2, 'GB': 1024 ** 3}


class RtLogger:
    """Logging front-end used by optimizers, solvers and experiment drivers"""

    def __init__(self, name: str = "rtepinn", log_file: Optional[str] = None,
                 level: str = "INFO", max_size: str = "10MB", backup_count: int = 5):
        """
        Args:
            name: Logger name
            log_file: Rotating log file, console only when omitted
            level: Logging level name
            max_size: Size before rotation, e.g. '5MB'
            backup_count: Rotated files kept
        """
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, level.upper()))
        self.logger.propagate = False
        self.logger.handlers.clear()

        self._attach(logging.StreamHandler(), CONSOLE_FORMAT, '%H:%M:%S')
        if log_file:
            Path(log_file).parent.mkdir(parents=True, exist_ok=True)
            self._attach(logging.handlers.RotatingFileHandler(
                log_file, maxBytes=self._parse_size(max_size), backupCount=backup_count),
                FILE_FORMAT, '%Y-%m-%d %H:%M:%S')

        # bound directly so %(funcName)s names the caller
        self.debug = self.logger.debug
        self.info = self.logger.info
        self.warning = self.logger.warning
        self.error = self.logger.error

    def _attach(self, handler: logging.Handler, fmt: str, datefmt: str):
        handler.setFormatter(logging.Formatter(fmt, datefmt=datefmt))
        self.logger.addHandler(handler)

    @staticmethod
    def _parse_size(size_str: str) -> int:
        """'10MB' -> bytes; a bare number is already bytes"""
        text = str(size_str).upper().strip()
        unit = _SIZE_UNITS.get(text[-2:])
        return int(text[:-2]) * unit if unit else int(text)

    def log_training_event(self, phase: str, iteration: int, loss: float, **extra):
        """One optimizer progress line; float extras in short scientific form"""
        details = " ".join(f"{k}={v:.3e}" if isinstance(v, float) else f"{k}={v}"
                           for k, v in extra.items())
        self.logger.info(f"Train [{phase}] it={iteration} loss={loss:.6e} {details}".rstrip(),
                         stacklevel=2)

    def log_solver_event(self, solver: str, event: str, details: str = ""):
        self.logger.info(f"Solver [{solver}] {event} | {details}", stacklevel=2)

    def log_experiment_event(self, event: str, experiment_id: str, details: str = ""):
        self.logger.info(f"Experiment [{experiment_id}] {event} | {details}", stacklevel=2)

    def log_error_with_context(self, error: Exception, context: str = ""):
        code = getattr(error, 'exit_code', None)
        suffix = f" (exit code {code})" if code is not None else ""
        self.logger.error(f"{context}: {type(error).__name__}: {error}{suffix}", stacklevel=2)


_logger_instance: Optional[RtLogger] = None


def get_logger(name: str = "rtepinn") -> RtLogger:
    """Process-wide logger, configured from the [logging] section on first use"""
    global _logger_instance
    if _logger_instance is not None:
        return _logger_instance
    try:
        from .config_manager import get_config
        section = get_config().get_section('logging')
        _logger_instance = RtLogger(name, section.get('file'), section.get('level', 'INFO'),
                                    section.get('max_size', '10MB'),
                                    section.get('backup_count', 5))
    except Exception:
        # unreadable config still gets console logging
        _logger_instance = RtLogger(name)
    return _logger_instance


def setup_logging(log_file: Optional[str] = None, level: str = "INFO") -> RtLogger:
    """Replace the process-wide logger"""
    global _logger_instance
    _logger_instance = RtLogger("rtepinn", log_file, level)
    return _logger_instance
