"""Utility modules for rtepinn."""

from .config_manager import ConfigManager, get_config
from .errors import (ConfigError, InvalidArgumentError, NumericalFailure,
                     RtePinnError, TapeError)
from .logger import RtLogger, get_logger

__all__ = ['ConfigManager', 'get_config', 'RtLogger', 'get_logger', 'RtePinnError',
           'InvalidArgumentError', 'ConfigError', 'NumericalFailure', 'TapeError']
