"""
Infrastructure - Error Handler Implementation
"""
import re
from datetime import datetime
from typing import Dict, List, Optional

from ..domain import (
    AcceptanceError,
    CoercivityError,
    ConfigError,
    ConvergenceError,
    ErrorSeverity,
    ErrorType,
    FitError,
    GridError,
    IErrorHandler,
    Nehari4Error,
    PathError,
    QuadratureError,
    RayMissesManifoldError,
    ResourceCapError,
    RunError,
)

ERROR_TYPES = {
    ConfigError: ErrorType.CONFIG,
    GridError: ErrorType.GRID,
    CoercivityError: ErrorType.COERCIVITY,
    RayMissesManifoldError: ErrorType.MANIFOLD,
    ConvergenceError: ErrorType.CONVERGENCE,
    PathError: ErrorType.CONVERGENCE,
    QuadratureError: ErrorType.QUADRATURE,
    FitError: ErrorType.FIT,
    AcceptanceError: ErrorType.ACCEPTANCE,
    ResourceCapError: ErrorType.RESOURCE,
}

SUGGESTIONS: Dict[ErrorType, List[str]] = {
    ErrorType.CONFIG: [
        "Check key names against Scripts/nehari4/config/run.example.json",
        "Keep 1 < q < 2 and n >= 5",
    ],
    ErrorType.GRID: ["Use an even number of modes m >= 4 per axis"],
    ErrorType.COERCIVITY: [
        "Increase beta or alpha so that |k|^4 + alpha|k|^2 + beta > 0 on every mode",
    ],
    ErrorType.MANIFOLD: [
        "Lower lambda or use lambda 'auto'",
        "Start from a different seed or initial_guess kind",
    ],
    ErrorType.CONVERGENCE: [
        "Raise solver.max_iters or loosen solver.tol_residual",
        "Reduce solver.step",
    ],
    ErrorType.QUADRATURE: ["Use larger bubble eps values or a larger delta"],
    ErrorType.FIT: ["Provide at least four strictly decreasing eps values"],
    ErrorType.ACCEPTANCE: ["Inspect the criteria records in report.json"],
    ErrorType.RESOURCE: [
        "Lower m, or raise max_nodes (NEHARI4_MAX_NODES) if memory allows",
    ],
    ErrorType.IO: ["Check that the output directory is writable"],
    ErrorType.UNKNOWN: ["Rerun with NEHARI4_DEBUG=1 and inspect the log"],
}

EXIT_CODES = {
    ErrorType.CONFIG: 2,
    ErrorType.GRID: 2,
    ErrorType.COERCIVITY: 2,
    ErrorType.FIT: 2,
    ErrorType.MANIFOLD: 3,
    ErrorType.CONVERGENCE: 3,
    ErrorType.QUADRATURE: 3,
    ErrorType.ACCEPTANCE: 4,
    ErrorType.RESOURCE: 5,
}

MAX_STORED_ERRORS = 50


class ErrorHandler(IErrorHandler):
    """Implementation of error handling operations"""

    def __init__(self) -> None:
        self.errors: List[RunError] = []
        self.error_counter = 0

    def create_error(self, exc: BaseException, command: str = "", context: str = "") -> RunError:
        """Create a new error instance with type detection"""
        self.error_counter += 1
        message = str(exc) or type(exc).__name__

        error_type = self._classify(exc, message)
        if isinstance(exc, Nehari4Error):
            exit_code = exc.exit_code
        else:
            exit_code = EXIT_CODES.get(error_type, 1)

        return RunError(
            id=self.error_counter,
            message=message,
            exit_code=exit_code,
            command=command,
            context=context,
            error_type=error_type,
            severity=self._determine_severity(error_type, message),
            timestamp=datetime.now(),
            resolution_suggestions=list(SUGGESTIONS.get(error_type, [])),
        )

    def store_error(self, error: RunError) -> None:
        self.errors.append(error)
        if len(self.errors) > MAX_STORED_ERRORS:
            self.errors = self.errors[-MAX_STORED_ERRORS:]

    def get_last_error(self) -> Optional[RunError]:
        return self.errors[-1] if self.errors else None

    def get_error_count(self) -> int:
        return self.error_counter

    def _classify(self, exc: BaseException, message: str) -> ErrorType:
        for cls in type(exc).__mro__:
            if cls in ERROR_TYPES:
                return ERROR_TYPES[cls]
        if isinstance(exc, MemoryError):
            return ErrorType.RESOURCE
        if isinstance(exc, OSError):
            return ErrorType.IO
        return self._detect_error_type(message)

    def _detect_error_type(self, message: str) -> ErrorType:
        """Detect error type based on message patterns"""
        message_lower = message.lower()

        patterns = {
            ErrorType.RESOURCE: [
                r"unable to allocate",
                r"out of memory",
                r"nodes, cap is",
            ],
            ErrorType.COERCIVITY: [
                r"not coercive",
                r"symbol.*(zero|negative)",
            ],
            ErrorType.CONVERGENCE: [
                r"did not converge",
                r"diverge",
                r"maximum number of iterations",
            ],
            ErrorType.QUADRATURE: [
                r"integral.*(divergent|probably)",
                r"roundoff error",
            ],
            ErrorType.CONFIG: [
                r"invalid config",
                r"must lie in",
            ],
        }

        for error_type, pattern_list in patterns.items():
            for pattern in pattern_list:
                if re.search(pattern, message_lower):
                    return error_type

        return ErrorType.UNKNOWN

    def _determine_severity(self, error_type: ErrorType, message: str) -> ErrorSeverity:
        severity_map = {
            ErrorType.CONFIG: ErrorSeverity.LOW,
            ErrorType.GRID: ErrorSeverity.LOW,
            ErrorType.FIT: ErrorSeverity.LOW,
            ErrorType.COERCIVITY: ErrorSeverity.MEDIUM,
            ErrorType.MANIFOLD: ErrorSeverity.MEDIUM,
            ErrorType.CONVERGENCE: ErrorSeverity.MEDIUM,
            ErrorType.QUADRATURE: ErrorSeverity.MEDIUM,
            ErrorType.ACCEPTANCE: ErrorSeverity.HIGH,
            ErrorType.RESOURCE: ErrorSeverity.HIGH,
            ErrorType.IO: ErrorSeverity.HIGH,
        }

        if re.search(r"\b(nan|non-finite|fatal)\b", message.lower()):
            return ErrorSeverity.CRITICAL

        return severity_map.get(error_type, ErrorSeverity.MEDIUM)
