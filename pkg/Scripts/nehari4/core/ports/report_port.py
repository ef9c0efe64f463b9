"""
Report Repository Port
Interface for the files a run leaves in its output directory
"""
from abc import abstractmethod
from pathlib import Path
from typing import Any, Dict, List, Mapping

from ...domain.entities import Field
from ...domain.interfaces import IFieldRepository


class IReportRepository(IFieldRepository):
    """Port for report, metadata, trace and snapshot storage"""

    @abstractmethod
    def write_report(self, record: Mapping[str, Any]) -> Path:
        """Write report.json deterministically"""
        pass

    @abstractmethod
    def write_meta(self, record: Mapping[str, Any]) -> Path:
        """Write meta.json (timestamps, versions, host)"""
        pass

    @abstractmethod
    def write_csv(self, name: str, rows: List[Dict[str, Any]]) -> Path:
        """Write one CSV trace"""
        pass

    @abstractmethod
    def write_slice(self, name: str, u: Field, dims: int = 1) -> Path:
        """CSV export of a 1-D or 2-D slice through a field"""
        pass

    @abstractmethod
    def written_files(self) -> List[str]:
        """Names of the files written so far, in order"""
        pass

    @abstractmethod
    def child(self, name: str) -> "IReportRepository":
        """Repository writing into a subdirectory"""
        pass
