"""
Config Service Port
Key-path access to one validated run document
"""
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional


class IConfigService(ABC):
    """Read and revise a run document; every change is revalidated"""

    @property
    @abstractmethod
    def run_config(self) -> Any:
        """The validated model behind the document"""
        pass

    @abstractmethod
    def get(self, key: str, default: Any = None) -> Any:
        """Value at a dot path such as "solver.max_iters" """
        pass

    @abstractmethod
    def set(self, key: str, value: Any) -> bool:
        """False, with the document untouched, when the new value fails validation"""
        pass

    @abstractmethod
    def get_section(self, section: str) -> Dict[str, Any]:
        pass

    @abstractmethod
    def has_key(self, key: str) -> bool:
        pass

    @abstractmethod
    def list_keys(self, section: Optional[str] = None) -> List[str]:
        pass

    @abstractmethod
    def to_document(self) -> Dict[str, Any]:
        """Resolved document as echoed under "config" in report.json"""
        pass
