"""
Display Service Port
Console summaries of a run; reports never depend on what is shown here
"""
from abc import ABC, abstractmethod
from enum import Enum
from typing import Any, Dict, List, Optional

from ...domain.entities import RunError


class DisplayLevel(Enum):
    """Message levels; quiet displays drop DEBUG and INFO"""
    DEBUG = "debug"
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"
    SUCCESS = "success"


class IDisplayService(ABC):
    """Port for the console side of a workflow"""

    @abstractmethod
    def display_message(self, message: str, level: DisplayLevel = DisplayLevel.INFO) -> None:
        pass

    @abstractmethod
    def display_error(self, error: str, details: Optional[str] = None) -> None:
        """Unclassified failure, e.g. before any service is wired"""
        pass

    @abstractmethod
    def display_run_error(self, error: RunError) -> None:
        """Classified failure with exit code and suggestions"""
        pass

    @abstractmethod
    def display_success(self, message: str) -> None:
        pass

    @abstractmethod
    def display_table(self, data: List[Dict[str, Any]], headers: Optional[List[str]] = None,
                      title: Optional[str] = None) -> None:
        """One row per record (thresholds, fit coefficients, solve summaries, criteria)"""
        pass

    @abstractmethod
    def display_progress(self, current: int, total: int, message: str = "") -> None:
        """Step counter for long suites such as verify-all"""
        pass
