"""
Environment - Host detection for run metadata and NEHARI4_* overrides
"""
import logging
import os
import platform
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import numpy as np
import psutil
import scipy
from dotenv import load_dotenv

from ..domain.errors import ConfigError
from .config import RunConfig

logger = logging.getLogger(__name__)

ENV_PREFIX = "NEHARI4_"
TRUTHY = {"1", "true", "yes", "on"}


@dataclass
class EnvironmentInfo:
    """Host facts recorded in meta.json"""
    system: str
    python: str
    numpy: str
    scipy: str
    cpu_count: Optional[int] = None
    memory_total: Optional[int] = None
    memory_available: Optional[int] = None
    in_container: bool = False
    shell: str = "unknown"

    def to_record(self) -> Dict[str, Any]:
        return asdict(self)


class EnvironmentDetector:
    """Detects the execution host"""

    def detect(self) -> EnvironmentInfo:
        memory = psutil.virtual_memory()
        return EnvironmentInfo(
            system=f"{platform.system()} {platform.release()}",
            python=sys.version.split()[0],
            numpy=np.__version__,
            scipy=scipy.__version__,
            cpu_count=psutil.cpu_count(logical=True),
            memory_total=int(memory.total),
            memory_available=int(memory.available),
            in_container=self._is_in_container(),
            shell=self._detect_shell(),
        )

    def _is_in_container(self) -> bool:
        return any(Path(p).exists() for p in ("/.dockerenv", "/run/.containerenv"))

    def _detect_shell(self) -> str:
        shell = os.getenv("SHELL", "")
        return Path(shell).name if shell else "unknown"


@dataclass
class RuntimeOverrides:
    """NEHARI4_* variables, read after an optional .env file"""
    log_level: Optional[str] = None
    debug: bool = False
    max_nodes: Optional[int] = None
    seed: Optional[int] = None
    applied: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_environment(cls, environ: Optional[Mapping[str, str]] = None,
                         dotenv_path: Optional[Path] = None) -> "RuntimeOverrides":
        if environ is None:
            load_dotenv(dotenv_path=dotenv_path, override=False)
            environ = os.environ

        def integer(name: str) -> Optional[int]:
            raw = environ.get(ENV_PREFIX + name)
            if raw is None or raw == "":
                return None
            try:
                return int(raw)
            except ValueError as exc:
                raise ConfigError(f"{ENV_PREFIX}{name} must be an integer, got {raw!r}") from exc

        level = environ.get(ENV_PREFIX + "LOG_LEVEL")
        return cls(
            log_level=level.upper() if level else None,
            debug=environ.get(ENV_PREFIX + "DEBUG", "").lower() in TRUTHY,
            max_nodes=integer("MAX_NODES"),
            seed=integer("SEED"),
        )

    def resolve_log_level(self, config: Optional[RunConfig] = None) -> str:
        if self.debug:
            return "DEBUG"
        if self.log_level:
            return self.log_level
        return config.log_level if config is not None else "INFO"

    def apply(self, config: RunConfig) -> RunConfig:
        """Config with max_nodes and seed overridden; the document is revalidated"""
        update: Dict[str, Any] = {}
        if self.max_nodes is not None:
            update["max_nodes"] = self.max_nodes
        if self.seed is not None:
            update["seed"] = self.seed
        if not update:
            return config
        for key, value in update.items():
            logger.info(f"Environment override {ENV_PREFIX}{key.upper()}={value}")
        self.applied = dict(update)
        document = config.resolved()
        document.update(update)
        try:
            return RunConfig.model_validate(document)
        except ValueError as exc:
            raise ConfigError(f"environment override rejected: {exc}") from exc
