"""
Infrastructure layer - Configuration, display, errors and report storage
"""
from .config import ConfigService, RunConfig, load_config, parse_config
from .display import RichDisplayService
from .environment import EnvironmentDetector, EnvironmentInfo, RuntimeOverrides
from .error_handler import ErrorHandler
from .filesystem import ReportRepository

__all__ = [
    'ConfigService',
    'RunConfig',
    'load_config',
    'parse_config',
    'RichDisplayService',
    'EnvironmentDetector',
    'EnvironmentInfo',
    'RuntimeOverrides',
    'ErrorHandler',
    'ReportRepository',
]
