"""
Nehari4 Core Ports
Defines interfaces for clean architecture boundaries
"""

from .command_port import CommandResult, ICommandService
from .config_port import IConfigService
from .display_port import DisplayLevel, IDisplayService
from .report_port import IReportRepository

__all__ = [
    'CommandResult',
    'ICommandService',
    'IConfigService',
    'DisplayLevel',
    'IDisplayService',
    'IReportRepository',
]
