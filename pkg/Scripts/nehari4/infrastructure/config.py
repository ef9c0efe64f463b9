"""
Configuration Service Implementation
Run documents are validated by pydantic models and exposed through dot notation
"""
import copy
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import (
    BaseModel,
    ConfigDict,
    Field as Setting,
    ValidationError,
    field_validator,
    model_validator,
)

from ..core.ports import IConfigService
from ..domain.bubble import DEFAULT_DELTA, DEFAULT_EPS_SWEEP
from ..domain.entities import DEFAULT_MAX_NODES, BubbleParams, Field, GridSpec, SolveOptions
from ..domain.errors import ConfigError

SUBCOMMANDS = ("thresholds", "bubble", "solve", "solve-signed", "mpass", "verify-all")
DEFAULT_MODES = {5: 16, 6: 8, 7: 6, 8: 4}
ACCEPTANCE_CRITERIA = tuple(range(1, 12))


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class FSpec(_Section):
    """f(x) = value + Σ_j c_j · mean_i cos(2πj x_i / L)"""
    kind: Literal["constant", "cosine"] = "constant"
    value: float = 1.0
    coefficients: List[float] = Setting(default_factory=list)

    @model_validator(mode="before")
    @classmethod
    def _from_number(cls, data: Any) -> Any:
        if isinstance(data, (int, float)) and not isinstance(data, bool):
            return {"kind": "constant", "value": float(data)}
        return data

    @model_validator(mode="after")
    def _positive(self) -> "FSpec":
        if self.kind == "constant" and self.coefficients:
            raise ValueError("constant f takes no coefficients")
        if self.value - sum(abs(c) for c in self.coefficients) <= 0.0:
            raise ValueError("f must be positive everywhere")
        return self

    def build(self, grid: GridSpec) -> Field:
        values = np.full(grid.shape, self.value)
        for j, c in enumerate(self.coefficients, start=1):
            wave = sum(np.cos(2.0 * math.pi * j * x / grid.L) for x in grid.coordinates())
            values = values + c * wave / grid.n
        return Field(values, grid)


class SolverConfig(_Section):
    max_iters: int = Setting(500, gt=0)
    step: float = Setting(1.0, gt=0)
    step_shrink: float = Setting(0.5, gt=0, lt=1)
    tol_residual: float = Setting(1e-6, gt=0)
    tol_energy: float = Setting(1e-13, gt=0)
    armijo: float = Setting(1e-4, gt=0, lt=1)
    max_backtracks: int = Setting(40, gt=0)
    stall_window: int = Setting(25, gt=0)
    restarts: int = Setting(1, ge=1)
    initial_guess: Literal["noise", "positive", "negative", "bubble"] = "noise"

    def options(self, seed: int) -> SolveOptions:
        return SolveOptions(
            max_iters=self.max_iters, step=self.step, step_shrink=self.step_shrink,
            tol_residual=self.tol_residual, tol_energy=self.tol_energy, seed=seed,
            armijo=self.armijo, max_backtracks=self.max_backtracks,
            stall_window=self.stall_window,
        )


class BubbleConfig(_Section):
    eps_values: List[float] = Setting(default_factory=lambda: list(DEFAULT_EPS_SWEEP))
    delta: float = Setting(DEFAULT_DELTA, gt=0)
    f0: float = Setting(1.0, gt=0)
    laplacian_f0: float = 0.0
    S_g0: float = 0.0
    a0: float = 0.0
    b0: float = 0.0
    g_floor: float = Setting(1e-6, gt=0)

    @field_validator("eps_values")
    @classmethod
    def _decreasing(cls, value: List[float]) -> List[float]:
        if len(value) < 4:
            raise ValueError("an expansion fit needs at least 4 eps values")
        if any(e <= 0 for e in value) or any(a <= b for a, b in zip(value, value[1:])):
            raise ValueError("eps values must be positive and strictly decreasing")
        return value

    def params(self, n: int, q: float) -> BubbleParams:
        return BubbleParams(
            n=n, bubble_eps=self.eps_values[0], delta=self.delta, f0=self.f0,
            laplacian_f0=self.laplacian_f0, S_g0=self.S_g0, a0=self.a0, b0=self.b0,
            q=q, g_floor=self.g_floor,
        )


class PathConfig(_Section):
    nodes: int = 9
    respect_manifold: bool = True
    tol_transverse: float = Setting(1e-3, gt=0)

    @field_validator("nodes")
    @classmethod
    def _odd(cls, value: int) -> int:
        if value < 9 or value % 2 == 0:
            raise ValueError("path nodes must be odd and >= 9")
        return value


class AcceptanceConfig(_Section):
    """Grid sizes and sample counts used by verify-all"""
    criteria: List[int] = Setting(default_factory=lambda: list(ACCEPTANCE_CRITERIA))
    m: int = 12
    samples: int = Setting(100, ge=1)
    gradient_pairs: int = Setting(5, ge=1)
    restarts: int = Setting(10, ge=1)
    pairs: int = Setting(20, ge=1)
    expansion_dims: List[int] = Setting(default_factory=lambda: [7, 8, 10])

    @field_validator("criteria")
    @classmethod
    def _known(cls, value: List[int]) -> List[int]:
        unknown = sorted(set(value) - set(ACCEPTANCE_CRITERIA))
        if unknown:
            raise ValueError(f"unknown acceptance criteria {unknown}")
        return sorted(set(value))

    @field_validator("m")
    @classmethod
    def _even(cls, value: int) -> int:
        if value < 4 or value % 2:
            raise ValueError("m must be even and >= 4")
        return value

    @field_validator("expansion_dims")
    @classmethod
    def _above_six(cls, value: List[int]) -> List[int]:
        if any(n <= 6 for n in value):
            raise ValueError("expansion dims must exceed 6")
        return value


class RunConfig(BaseModel):
    """One run: a subcommand, the problem and the options of every workflow"""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    subcommand: Literal["thresholds", "bubble", "solve", "solve-signed", "mpass", "verify-all"]
    n: int = 5
    m: Optional[int] = None
    L: float = Setting(2.0 * math.pi, gt=0)
    alpha: float = 2.0
    beta: float = 1.0
    a_file: Optional[str] = None
    b_file: Optional[str] = None
    f: FSpec = Setting(default_factory=FSpec)
    lam: Union[Literal["auto"], float] = Setting("auto", alias="lambda")
    lambda_factor: float = Setting(0.9, gt=0, lt=1)
    q: float = 1.5
    seed: int = Setting(0, ge=0)
    sobolev_slack: float = Setting(0.1, ge=0)
    A_eps: Optional[float] = Setting(None, gt=0)
    rho: Optional[float] = Setting(None, gt=0)
    max_nodes: int = Setting(DEFAULT_MAX_NODES, gt=0)
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    solver: SolverConfig = Setting(default_factory=SolverConfig)
    bubble: BubbleConfig = Setting(default_factory=BubbleConfig)
    path: PathConfig = Setting(default_factory=PathConfig)
    acceptance: AcceptanceConfig = Setting(default_factory=AcceptanceConfig)

    @field_validator("n")
    @classmethod
    def _dimension(cls, value: int) -> int:
        if value < 5:
            raise ValueError("n must be >= 5 so that N = 2n/(n-4) is finite")
        return value

    @field_validator("q")
    @classmethod
    def _subcritical(cls, value: float) -> float:
        if not 1.0 < value < 2.0:
            raise ValueError("q must lie in (1,2)")
        return value

    @field_validator("lam")
    @classmethod
    def _non_negative(cls, value: Union[str, float]) -> Union[str, float]:
        if value != "auto" and not (math.isfinite(value) and value >= 0.0):
            raise ValueError("lambda must be 'auto' or a finite number >= 0")
        return value

    @model_validator(mode="after")
    def _fill_defaults(self) -> "RunConfig":
        if self.m is None:
            self.m = DEFAULT_MODES.get(self.n, 4)
        if self.m < 4 or self.m % 2:
            raise ValueError("m must be even and >= 4")
        if (self.a_file is None) != (self.b_file is None):
            raise ValueError("variable coefficients need both a_file and b_file")
        return self

    @property
    def variable_coefficients(self) -> bool:
        return self.a_file is not None

    def grid(self) -> GridSpec:
        return GridSpec(n=self.n, m=self.m, L=self.L, max_nodes=self.max_nodes)

    def solve_options(self) -> SolveOptions:
        return self.solver.options(self.seed)

    def bubble_params(self) -> BubbleParams:
        return self.bubble.params(self.n, self.q)

    def resolved(self) -> Dict[str, Any]:
        """Every key with its effective value, as echoed into report.json"""
        return self.model_dump(mode="json", by_alias=True)


def _describe(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(p) for p in error["loc"]) or "config"
        parts.append(f"{location}: {error['msg']}")
    return "; ".join(parts)


def parse_config(text: str, fmt: str = "json") -> RunConfig:
    """Validate one run document, filling every default"""
    try:
        document = yaml.safe_load(text) if fmt in ("yaml", "yml") else json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"malformed config document: {exc}") from exc
    if not isinstance(document, dict):
        raise ConfigError("config document must be a mapping")
    try:
        return RunConfig.model_validate(document)
    except ValidationError as exc:
        raise ConfigError(
            f"invalid config: {_describe(exc)}",
            details=[str(error["msg"]) for error in exc.errors()],
        ) from exc


def load_config(path: Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text, fmt=path.suffix.lstrip(".").lower() or "json")


class ConfigService(IConfigService):
    """Dot-notation access to a validated run document"""

    def __init__(self, config: RunConfig):
        self.config = config
        self._document: Dict[str, Any] = config.resolved()

    @property
    def run_config(self) -> RunConfig:
        return self.config

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value using dot notation"""
        value: Any = self._document
        try:
            for k in key.split("."):
                value = value[k]
            return value
        except (KeyError, TypeError):
            return default

    def set(self, key: str, value: Any) -> bool:
        """Set a value and revalidate; the document is unchanged on failure"""
        keys = key.split(".")
        document = copy.deepcopy(self._document)
        node = document
        try:
            for k in keys[:-1]:
                node = node.setdefault(k, {})
            node[keys[-1]] = value
            config = RunConfig.model_validate(document)
        except (ValidationError, TypeError, AttributeError):
            return False
        self.config = config
        self._document = config.resolved()
        return True

    def get_section(self, section: str) -> Dict[str, Any]:
        value = self.get(section, {})
        return value if isinstance(value, dict) else {}

    def has_key(self, key: str) -> bool:
        sentinel = object()
        return self.get(key, sentinel) is not sentinel

    def list_keys(self, section: Optional[str] = None) -> List[str]:
        """List available configuration keys"""
        if section:
            return list(self.get_section(section).keys())
        return list(self._document.keys())

    def to_document(self) -> Dict[str, Any]:
        return copy.deepcopy(self._document)
