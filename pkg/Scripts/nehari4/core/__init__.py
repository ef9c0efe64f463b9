"""
Nehari4 Core
Application object, container and ports
"""

from .application import ApplicationConfig, Nehari4Application
from .container import Nehari4Container
from .ports import (
    CommandResult, ICommandService, IConfigService, IDisplayService, IReportRepository
)

__all__ = [
    'ApplicationConfig',
    'Nehari4Application',
    'Nehari4Container',
    'CommandResult', 'ICommandService', 'IConfigService', 'IDisplayService',
    'IReportRepository',
]
