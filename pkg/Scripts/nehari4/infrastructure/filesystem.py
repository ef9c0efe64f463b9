"""
Report repository implementation
Writes report.json, meta.json, field snapshots and CSV traces into one directory
"""
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import numpy as np
import pandas as pd

from ..core.ports import IReportRepository
from ..domain.entities import DEFAULT_MAX_NODES, Field, GridSpec
from ..domain.errors import GridError

logger = logging.getLogger(__name__)

SNAPSHOT_DTYPE = np.dtype("<f8")
HEADER_SUFFIX = ".hdr"


def to_plain(value: Any) -> Any:
    """JSON-ready copy: numpy scalars unwrapped, non-finite floats as null"""
    if isinstance(value, Mapping):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, Path):
        return value.name
    return value


def render_json(record: Mapping[str, Any]) -> str:
    return json.dumps(to_plain(record), sort_keys=True, indent=2,
                      ensure_ascii=False, allow_nan=False) + "\n"


class ReportRepository(IReportRepository):
    """File operations for one run's output directory"""

    def __init__(self, out_dir: Path, max_nodes: int = DEFAULT_MAX_NODES):
        self.out_dir = Path(out_dir)
        self.max_nodes = max_nodes
        self._written: List[str] = []

    def initialize(self) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def _path(self, name: str) -> Path:
        path = self.out_dir / name
        if path.name not in self._written:
            self._written.append(path.name)
        return path

    def write_report(self, record: Mapping[str, Any]) -> Path:
        path = self._path("report.json")
        path.write_text(render_json(record), encoding="utf-8")
        return path

    def write_meta(self, record: Mapping[str, Any]) -> Path:
        path = self._path("meta.json")
        path.write_text(render_json(record), encoding="utf-8")
        return path

    def write_csv(self, name: str, rows: List[Dict[str, Any]]) -> Path:
        path = self._path(name if name.endswith(".csv") else f"{name}.csv")
        frame = pd.DataFrame([to_plain(row) for row in rows])
        frame.to_csv(path, index=False, float_format="%.17g")
        return path

    def write_field(self, name: str, u: Field) -> Path:
        """Raw little-endian float64 payload plus a key=value header"""
        path = self._path(f"{name}.field")
        path.write_bytes(np.ascontiguousarray(u.values, dtype=SNAPSHOT_DTYPE).tobytes(order="C"))
        header = self._path(f"{name}.field{HEADER_SUFFIX}")
        grid = u.grid
        header.write_text(
            f"n={grid.n}\nm={grid.m}\nL={float(grid.L)!r}\n"
            "dtype=float64-le\norder=row-major\n",
            encoding="utf-8",
        )
        logger.debug(f"Wrote snapshot {path.name} ({grid.node_count} nodes)")
        return path

    def write_slice(self, name: str, u: Field, dims: int = 1) -> Path:
        """CSV of u along x1 (dims=1) or the x1-x2 plane (dims=2), other indices 0"""
        grid = u.grid
        x = np.arange(grid.m) * grid.spacing
        index = (slice(None),) * dims + (0,) * (grid.n - dims)
        values = u.values[index]
        if dims == 1:
            rows = [{"x1": xi, "u": vi} for xi, vi in zip(x.tolist(), values.tolist())]
        elif dims == 2:
            rows = [{"x1": x[i], "x2": x[j], "u": values[i, j]}
                    for i in range(grid.m) for j in range(grid.m)]
        else:
            raise ValueError(f"slices are 1-D or 2-D, got dims={dims}")
        return self.write_csv(f"{name}_slice{dims}d", rows)

    def read_field(self, path: Path, max_nodes: Optional[int] = None) -> Field:
        path = Path(path)
        header_path = path.with_name(path.name + HEADER_SUFFIX)
        try:
            header = dict(
                line.split("=", 1)
                for line in header_path.read_text(encoding="utf-8").splitlines()
                if "=" in line
            )
            grid = GridSpec(n=int(header["n"]), m=int(header["m"]), L=float(header["L"]),
                            max_nodes=max_nodes or self.max_nodes)
        except (OSError, KeyError, ValueError) as exc:
            raise GridError(f"unreadable snapshot header {header_path}: {exc}") from exc
        payload = np.frombuffer(path.read_bytes(), dtype=SNAPSHOT_DTYPE)
        if payload.size != grid.node_count:
            raise GridError(
                f"snapshot {path.name} holds {payload.size} values, header implies "
                f"{grid.node_count}"
            )
        return Field(payload.reshape(grid.shape).astype(np.float64), grid)

    def written_files(self) -> List[str]:
        return list(self._written)

    def child(self, name: str) -> "ReportRepository":
        repository = ReportRepository(self.out_dir / name, self.max_nodes)
        repository.initialize()
        return repository
