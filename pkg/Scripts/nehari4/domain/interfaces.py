"""
Domain interfaces - Contracts for field storage and error handling
"""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Optional

from .entities import Field, RunError


class IFieldRepository(ABC):
    """Interface for field snapshot storage"""

    @abstractmethod
    def write_field(self, name: str, u: Field) -> Path:
        """Write a snapshot and its header, returning the payload path"""
        pass

    @abstractmethod
    def read_field(self, path: Path) -> Field:
        """Read a snapshot back, validating the header against the payload"""
        pass


class IErrorHandler(ABC):
    """Interface for error handling operations"""

    @abstractmethod
    def create_error(self, exc: BaseException, command: str = "", context: str = "") -> RunError:
        """Classify an exception into a run error"""
        pass

    @abstractmethod
    def store_error(self, error: RunError) -> None:
        """Store error for the run summary"""
        pass

    @abstractmethod
    def get_last_error(self) -> Optional[RunError]:
        """Get the most recent error"""
        pass

    @abstractmethod
    def get_error_count(self) -> int:
        """Get total error count"""
        pass
