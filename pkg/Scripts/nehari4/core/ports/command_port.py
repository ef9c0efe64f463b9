"""
Command Service Port
Interface for running one configured workflow
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from ...domain.entities import RunError


@dataclass
class CommandResult:
    """Result of one run"""
    success: bool
    output: Any = None
    error: Optional[RunError] = None
    execution_time: float = 0.0
    exit_code: int = 0
    metadata: Dict[str, Any] = field(default_factory=dict)


class ICommandService(ABC):
    """Port for workflow execution services"""

    @abstractmethod
    def run(self, config_path: Path, out_dir: Path) -> CommandResult:
        """Load a config document, run its subcommand and write the reports"""
        pass

    @abstractmethod
    def list_available_commands(self) -> List[str]:
        """Get list of available subcommands"""
        pass

    @abstractmethod
    def get_command_help(self, command: str) -> Optional[str]:
        """Get help text for a specific subcommand"""
        pass

    @abstractmethod
    def validate_command(self, command: str) -> bool:
        """Check that a subcommand is registered"""
        pass
