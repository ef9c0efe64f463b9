"""
Domain entities - Grids, fields and the records exchanged between modules
"""
import math
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .errors import CoercivityError, ConfigError, GridError, ResourceCapError

DEFAULT_MAX_NODES = 2 ** 22


class Sign(Enum):
    PLUS = "+"
    MINUS = "-"


class Branch(Enum):
    SMALL = "small"
    LARGE = "large"


class ExpansionModel(Enum):
    EPS2 = "eps2"
    EPS2LOG = "eps2log"


class ErrorSeverity(Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


class ErrorType(Enum):
    CONFIG = "config"
    GRID = "grid"
    COERCIVITY = "coercivity"
    MANIFOLD = "manifold"
    CONVERGENCE = "convergence"
    QUADRATURE = "quadrature"
    FIT = "fit"
    ACCEPTANCE = "acceptance"
    RESOURCE = "resource"
    IO = "io"
    UNKNOWN = "unknown"


@lru_cache(maxsize=16)
def _axis_wavenumbers(m: int, L: float) -> np.ndarray:
    k = np.fft.fftfreq(m, d=L / m) * 2.0 * np.pi
    k.setflags(write=False)
    return k


@lru_cache(maxsize=8)
def _k_squared(n: int, m: int, L: float) -> np.ndarray:
    k = _axis_wavenumbers(m, L)
    ksq = np.zeros((m,) * n)
    for axis in range(n):
        shape = [1] * n
        shape[axis] = m
        ksq = ksq + (k ** 2).reshape(shape)
    ksq.setflags(write=False)
    return ksq


@dataclass(frozen=True)
class GridSpec:
    """Periodic box [0, L)^n sampled with m nodes per axis"""
    n: int
    m: int
    L: float = 2.0 * math.pi
    max_nodes: int = DEFAULT_MAX_NODES

    def __post_init__(self) -> None:
        if self.n < 5:
            raise GridError(f"dimension n must be >= 5, got {self.n}")
        if self.m < 4 or self.m % 2:
            raise GridError(f"modes per axis m must be even and >= 4, got {self.m}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise GridError(f"box side L must be positive, got {self.L}")
        if self.node_count > self.max_nodes:
            raise ResourceCapError(
                f"grid n={self.n}, m={self.m} needs {self.node_count} nodes, "
                f"cap is {self.max_nodes}"
            )

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.m,) * self.n

    @property
    def node_count(self) -> int:
        return self.m ** self.n

    @property
    def volume(self) -> float:
        return self.L ** self.n

    @property
    def spacing(self) -> float:
        return self.L / self.m

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.n

    @property
    def critical_exponent(self) -> float:
        return 2.0 * self.n / (self.n - 4)

    def axis_wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers 2πk/L along one axis, numpy fft ordering"""
        return _axis_wavenumbers(self.m, float(self.L))

    def k_squared(self) -> np.ndarray:
        """|2πk/L|² on the full frequency lattice"""
        return _k_squared(self.n, self.m, float(self.L))

    def axis_shape(self, axis: int) -> Tuple[int, ...]:
        shape = [1] * self.n
        shape[axis] = self.m
        return tuple(shape)

    def coordinates(self) -> List[np.ndarray]:
        """Broadcastable node coordinates, one array per axis"""
        x = np.arange(self.m) * self.spacing
        return [x.reshape(self.axis_shape(axis)) for axis in range(self.n)]

    def compatible(self, other: "GridSpec") -> bool:
        return (self.n, self.m, float(self.L)) == (other.n, other.m, float(other.L))

    def to_record(self) -> Dict[str, Any]:
        return {"n": self.n, "m": self.m, "L": float(self.L)}


Scalar = Union[int, float]


@dataclass(frozen=True, eq=False)
class Field:
    """Real scalar field sampled on the nodes of a grid"""
    values: np.ndarray
    grid: GridSpec

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            try:
                values = np.broadcast_to(values, self.grid.shape).copy()
            except ValueError as exc:
                raise GridError(
                    f"field shape {values.shape} does not match grid {self.grid.shape}"
                ) from exc
        if not np.all(np.isfinite(values)):
            raise GridError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, grid: GridSpec, value: float) -> "Field":
        return cls(np.full(grid.shape, float(value)), grid)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "Field":
        return cls.constant(grid, 0.0)

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Any) -> "Field":
        """Evaluate fn(x_1, ..., x_n) on broadcastable coordinates"""
        return cls(np.broadcast_to(fn(*grid.coordinates()), grid.shape), grid)

    def _operand(self, other: Union["Field", Scalar]) -> Union[np.ndarray, float]:
        if isinstance(other, Field):
            if not self.grid.compatible(other.grid):
                raise GridError("binary operation on fields from different grids")
            return other.values
        return float(other)

    def __add__(self, other: Union["Field", Scalar]) -> "Field":
        return Field(self.values + self._operand(other), self.grid)

    __radd__ = __add__

    def __sub__(self, other: Union["Field", Scalar]) -> "Field":
        return Field(self.values - self._operand(other), self.grid)

    def __rsub__(self, other: Scalar) -> "Field":
        return Field(float(other) - self.values, self.grid)

    def __mul__(self, other: Union["Field", Scalar]) -> "Field":
        return Field(self.values * self._operand(other), self.grid)

    __rmul__ = __mul__

    def __truediv__(self, other: Union["Field", Scalar]) -> "Field":
        return Field(self.values / self._operand(other), self.grid)

    def __neg__(self) -> "Field":
        return Field(-self.values, self.grid)

    def max(self) -> float:
        return float(self.values.max())

    def min(self) -> float:
        return float(self.values.min())


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Normalised Fourier coefficients: values = Σ_k c_k e^{i k·x}"""
    coefficients: np.ndarray
    grid: GridSpec


@dataclass(frozen=True, eq=False)
class Problem:
    """Coefficients and parameters of the fourth-order equation"""
    grid: GridSpec
    f: Field
    lam: float
    q: float
    alpha: Optional[float] = None
    beta: Optional[float] = None
    a: Optional[Field] = None
    b: Optional[Field] = None

    def __post_init__(self) -> None:
        if not 1.0 < self.q < 2.0:
            raise ConfigError(f"q must lie in (1,2), got {self.q}")
        if self.lam < 0 or not math.isfinite(self.lam):
            raise ConfigError(f"lambda must be finite and >= 0, got {self.lam}")
        for name in ("f", "a", "b"):
            coefficient = getattr(self, name)
            if coefficient is not None and not self.grid.compatible(coefficient.grid):
                raise GridError(f"coefficient {name} lives on a different grid")
        if self.f.min() <= 0.0:
            raise ConfigError("f must be positive everywhere")
        if self.constant_coefficients:
            if self.alpha is None or self.beta is None:
                raise ConfigError("constant problems need both alpha and beta")
            ksq = self.grid.k_squared()
            sigma_min = float(np.min(ksq ** 2 + self.alpha * ksq + self.beta))
            if sigma_min <= 0.0:
                raise CoercivityError(
                    f"symbol |k|^4 + {self.alpha}|k|^2 + {self.beta} is not coercive "
                    f"on the grid (min {sigma_min:.3e})"
                )
        elif self.a is None or self.b is None:
            raise ConfigError("variable problems need both coefficient fields a and b")

    @classmethod
    def constant(cls, grid: GridSpec, alpha: float, beta: float, lam: float,
                 q: float, f: Optional[Field] = None) -> "Problem":
        return cls(grid=grid, f=f if f is not None else Field.constant(grid, 1.0),
                   lam=float(lam), q=float(q), alpha=float(alpha), beta=float(beta))

    @property
    def constant_coefficients(self) -> bool:
        return self.a is None and self.b is None

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def N(self) -> float:
        return self.grid.critical_exponent

    @property
    def maxf(self) -> float:
        return self.f.max()

    @property
    def volume(self) -> float:
        return self.grid.volume

    def with_lambda(self, lam: float) -> "Problem":
        return replace(self, lam=float(lam))

    def to_record(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            "grid": self.grid.to_record(), "lambda": self.lam, "q": self.q,
            "N": self.N, "maxf": self.maxf,
        }
        if self.constant_coefficients:
            record.update(alpha=self.alpha, beta=self.beta)
        else:
            record.update(a_mean=float(self.a.values.mean()),
                          b_mean=float(self.b.values.mean()))
        return record


@dataclass(frozen=True)
class EnergyBreakdown:
    """Components of J_λ and Q_λ at one field"""
    norm_sq: float
    q_term: float
    crit_term: float
    J: float
    Q: float

    @classmethod
    def compose(cls, norm_sq: float, q_term: float, crit_term: float,
                lam: float, q: float, N: float) -> "EnergyBreakdown":
        return cls(
            norm_sq=norm_sq,
            q_term=q_term,
            crit_term=crit_term,
            J=0.5 * norm_sq - (lam / q) * q_term - crit_term / N,
            Q=norm_sq - lam * q_term - crit_term,
        )

    def to_record(self) -> Dict[str, float]:
        return {"norm_sq": self.norm_sq, "q_term": self.q_term,
                "crit_term": self.crit_term, "J": self.J, "Q": self.Q}


@dataclass(frozen=True)
class FiberingRoots:
    """Positive zeros of t -> Q_λ(t u); t_small is None when λ = 0"""
    t_small: Optional[float]
    t_large: float


@dataclass(frozen=True)
class Thresholds:
    lambda0: float
    lambda1: float
    rho: float
    K0: float
    A_eps: float
    sobolev_slack: float
    Lambda_equiv: float
    c_star: float
    Lambda_up: float = float("nan")
    volume: float = float("nan")
    maxf: float = float("nan")
    lambda1_variants: Dict[str, float] = field(default_factory=dict)

    @property
    def lambda_window(self) -> float:
        return min(self.lambda0, self.lambda1)

    def to_record(self) -> Dict[str, Any]:
        return {
            "lambda0": self.lambda0, "lambda1": self.lambda1, "rho": self.rho,
            "K0": self.K0, "A_eps": self.A_eps, "sobolev_slack": self.sobolev_slack,
            "Lambda_low": self.Lambda_equiv, "Lambda_up": self.Lambda_up,
            "c_star": self.c_star, "volume": self.volume, "maxf": self.maxf,
            "lambda1_variants": dict(self.lambda1_variants),
        }


@dataclass(frozen=True)
class SolveOptions:
    max_iters: int = 500
    step: float = 1.0
    step_shrink: float = 0.5
    tol_residual: float = 1e-6
    tol_energy: float = 1e-13
    seed: int = 0
    armijo: float = 1e-4
    max_backtracks: int = 40
    stall_window: int = 25

    def __post_init__(self) -> None:
        for name in ("max_iters", "step", "tol_residual", "tol_energy",
                     "armijo", "max_backtracks", "stall_window"):
            if getattr(self, name) <= 0:
                raise ValueError(f"SolveOptions.{name} must be positive")
        if not 0.0 < self.step_shrink < 1.0:
            raise ValueError("SolveOptions.step_shrink must lie in (0,1)")
        if self.seed < 0:
            raise ValueError("SolveOptions.seed must be non-negative")


@dataclass(frozen=True, eq=False)
class SolveReport:
    u: Field
    J: float
    Q: float
    residual_rel: float
    iters: int
    energy_trace: Tuple[float, ...]
    below_threshold: Optional[bool]
    spectral_tail: float
    norm: float = float("nan")
    converged: bool = False
    in_manifold: Optional[bool] = None
    sign: Optional[Sign] = None
    min_u: float = float("nan")
    max_u: float = float("nan")
    sign_audit_passed: Optional[bool] = None
    flags: Tuple[str, ...] = ()

    def to_record(self) -> Dict[str, Any]:
        return {
            "J": self.J, "Q": self.Q, "residual_rel": self.residual_rel,
            "iters": self.iters, "norm": self.norm, "converged": self.converged,
            "below_threshold": self.below_threshold,
            "spectral_tail": self.spectral_tail, "in_manifold": self.in_manifold,
            "sign": self.sign.value if self.sign else None,
            "min_u": self.min_u, "max_u": self.max_u,
            "sign_audit_passed": self.sign_audit_passed,
            "flags": list(self.flags),
        }


@dataclass(frozen=True, eq=False)
class PathReport:
    nodes: Tuple[Field, ...]
    c_lambda: float
    saddle: SolveReport
    node_energies: Tuple[float, ...]
    c_trace: Tuple[float, ...]
    iterations: int
    converged: bool
    respect_manifold: bool = True
    argmax_index: int = -1
    transverse_gradient: float = float("nan")
    flags: Tuple[str, ...] = ()

    def to_record(self) -> Dict[str, Any]:
        return {
            "c_lambda": self.c_lambda, "node_energies": list(self.node_energies),
            "iterations": self.iterations, "converged": self.converged,
            "respect_manifold": self.respect_manifold,
            "argmax_index": self.argmax_index,
            "transverse_gradient": self.transverse_gradient,
            "saddle": self.saddle.to_record(), "flags": list(self.flags),
            "saddle_refinement": "constrained climbing descent at the barrier node",
        }


@dataclass(frozen=True)
class BubbleParams:
    n: int
    bubble_eps: float
    delta: float = 0.5
    f0: float = 1.0
    laplacian_f0: float = 0.0
    S_g0: float = 0.0
    a0: float = 0.0
    b0: float = 0.0
    q: float = 1.5
    g_floor: float = 1e-6

    def __post_init__(self) -> None:
        if self.n <= 4:
            raise ValueError(f"bubble dimension must exceed 4, got {self.n}")
        if self.bubble_eps <= 0 or self.delta <= 0 or self.f0 <= 0:
            raise ValueError("bubble_eps, delta and f0 must be positive")
        if self.g_floor <= 0:
            raise ValueError("g_floor must be positive")

    def with_eps(self, bubble_eps: float) -> "BubbleParams":
        return replace(self, bubble_eps=float(bubble_eps))


@dataclass(frozen=True)
class ExpansionFit:
    c0: float
    c2: float
    model: ExpansionModel
    stderr: float
    eps_values: Tuple[float, ...]
    nuisance: Dict[float, float] = field(default_factory=dict)

    def to_record(self) -> Dict[str, Any]:
        return {"c0": self.c0, "c2": self.c2, "model": self.model.value,
                "stderr": self.stderr, "eps_values": list(self.eps_values),
                "nuisance": {str(p): c for p, c in sorted(self.nuisance.items())}}


@dataclass(frozen=True)
class PalaisSmaleCheck:
    passed: bool
    value: float
    c_star: float
    margin: float

    def to_record(self) -> Dict[str, Any]:
        return {"passed": self.passed, "value": self.value,
                "c_star": self.c_star, "margin": self.margin}


@dataclass
class RunError:
    """Represents a classified failure of one run"""
    id: int
    message: str
    exit_code: int = 1
    command: str = ""
    context: str = ""
    timestamp: datetime = field(default_factory=datetime.now)
    error_type: ErrorType = ErrorType.UNKNOWN
    severity: ErrorSeverity = ErrorSeverity.MEDIUM
    resolution_suggestions: List[str] = field(default_factory=list)

    @property
    def severity_color(self) -> str:
        color_map = {
            ErrorSeverity.LOW: "yellow",
            ErrorSeverity.MEDIUM: "red",
            ErrorSeverity.HIGH: "bright_red",
            ErrorSeverity.CRITICAL: "red on white",
        }
        return color_map.get(self.severity, "red")


@dataclass(frozen=True)
class BubbleIntegrals:
    """Radial integrals of the concentrated test function at one ε"""
    bubble_eps: float
    massN: float
    gradSq: float
    bilapSq: float
    bTerm: float
    qTerm: float
    g_clamped: bool = False

    @property
    def quadratic_form(self) -> float:
        return self.bilapSq - self.gradSq + self.bTerm

    def to_record(self) -> Dict[str, Any]:
        return {"eps": self.bubble_eps, "massN": self.massN, "gradSq": self.gradSq,
                "bilapSq": self.bilapSq, "bTerm": self.bTerm, "qTerm": self.qTerm,
                "g_clamped": self.g_clamped}


@dataclass(frozen=True)
class ExistenceCondition:
    holds: bool
    margin: float
    variant: str = "statement"

    def to_record(self) -> Dict[str, Any]:
        return {"holds": self.holds, "margin": self.margin, "variant": self.variant}


@dataclass(frozen=True)
class ThresholdGap:
    """Upper bounds for J_λ(u_ε) over an ε sweep against c_star"""
    c_star: float
    lam: float
    eps_values: Tuple[float, ...]
    bounds: Tuple[float, ...]
    lambda_bounds: Tuple[float, ...]
    smallest_eps_below: Optional[float]
    fit: Optional[ExpansionFit] = None

    @property
    def eps_below(self) -> Tuple[float, ...]:
        return tuple(e for e, b in zip(self.eps_values, self.bounds) if b < self.c_star)

    def to_record(self) -> Dict[str, Any]:
        return {
            "c_star": self.c_star, "lambda": self.lam,
            "eps_values": list(self.eps_values), "bounds": list(self.bounds),
            "lambda_bounds": list(self.lambda_bounds),
            "gaps": [self.c_star - b for b in self.bounds],
            "eps_below": list(self.eps_below),
            "smallest_eps_below": self.smallest_eps_below,
            "fit": self.fit.to_record() if self.fit else None,
        }


@dataclass(frozen=True, eq=False)
class MultistartReport:
    """Independent solves from seeds seed, seed+1, ... in seed order"""
    reports: Tuple[SolveReport, ...]
    seeds: Tuple[int, ...]

    @property
    def energies(self) -> Tuple[float, ...]:
        return tuple(r.J for r in self.reports)

    @property
    def best_index(self) -> int:
        return int(np.argmin(self.energies))

    @property
    def best(self) -> SolveReport:
        return self.reports[self.best_index]

    def agreeing(self, tol: float = 1e-4) -> int:
        """Number of restarts within tol of the best energy"""
        best = self.best.J
        return sum(1 for J in self.energies if J - best <= tol)

    def to_record(self) -> Dict[str, Any]:
        return {"seeds": list(self.seeds), "energies": list(self.energies),
                "best_index": self.best_index, "best_J": self.best.J,
                "converged": [r.converged for r in self.reports]}


@dataclass(frozen=True)
class LocalMinimumAudit:
    passed: bool
    worst_drop: float
    samples: int
    rel_size: float

    def to_record(self) -> Dict[str, Any]:
        return {"passed": self.passed, "worst_drop": self.worst_drop,
                "samples": self.samples, "rel_size": self.rel_size}
