"""
Command Adapter
Maps subcommands to use cases and run outcomes to exit codes
"""
import logging
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from ... import __version__
from ...application import (
    BubbleUseCase,
    MountainPassUseCase,
    SolveSignedUseCase,
    SolveUseCase,
    ThresholdsUseCase,
    VerifyAllUseCase,
    WorkflowOutcome,
)
from ...core.ports import CommandResult, ICommandService, IDisplayService, IReportRepository
from ...domain import IErrorHandler, RunError
from ...domain.entities import DEFAULT_MAX_NODES
from ...infrastructure.config import ConfigService, RunConfig, load_config
from ...infrastructure.environment import EnvironmentDetector, RuntimeOverrides
from ...infrastructure.filesystem import ReportRepository

RepositoryFactory = Callable[[Path, int], IReportRepository]


class CommandAdapter(ICommandService):
    """Runs one config document end to end"""

    def __init__(self, display_service: IDisplayService, error_handler: IErrorHandler,
                 overrides: Optional[RuntimeOverrides] = None,
                 repository_factory: RepositoryFactory = ReportRepository,
                 environment_detector: Optional[EnvironmentDetector] = None):
        self.display_service = display_service
        self.error_handler = error_handler
        self.overrides = overrides or RuntimeOverrides()
        self.repository_factory = repository_factory
        self.environment_detector = environment_detector or EnvironmentDetector()
        self.logger = logging.getLogger(__name__)

        self._commands: Dict[str, Dict[str, Any]] = {}
        self._register_default_commands()

    def _register_default_commands(self) -> None:
        default_commands = {
            "thresholds": {
                "handler": ThresholdsUseCase,
                "description": "lambda0, lambda1, rho, K0, norm bounds and c_star",
                "category": "analysis",
            },
            "bubble": {
                "handler": BubbleUseCase,
                "description": "Bubble integrals, expansion fits and the threshold gap",
                "category": "analysis",
            },
            "solve": {
                "handler": SolveUseCase,
                "description": "Minimize J on the Nehari manifold",
                "category": "solvers",
            },
            "solve-signed": {
                "handler": SolveSignedUseCase,
                "description": "Positive and negative minimizers",
                "category": "solvers",
            },
            "mpass": {
                "handler": MountainPassUseCase,
                "description": "Signed minimizers and the mountain-pass saddle between them",
                "category": "solvers",
            },
            "verify-all": {
                "handler": VerifyAllUseCase,
                "description": "Acceptance suite",
                "category": "acceptance",
            },
        }
        self._commands.update(default_commands)

    def list_available_commands(self) -> List[str]:
        return sorted(self._commands.keys())

    def get_command_help(self, command: str) -> Optional[str]:
        if command not in self._commands:
            return None
        return self._commands[command].get("description", "No description available")

    def validate_command(self, command: str) -> bool:
        return command in self._commands

    def run(self, config_path: Path, out_dir: Path) -> CommandResult:
        started = datetime.now(timezone.utc)
        start_time = time.perf_counter()
        meta: Dict[str, Any] = {
            "version": __version__,
            "config_path": str(config_path),
            "started_at": started.isoformat(),
            "environment": self.environment_detector.detect().to_record(),
        }

        config: Optional[RunConfig] = None
        repository: Optional[IReportRepository] = None
        outcome = WorkflowOutcome(record={})
        error: Optional[RunError] = None
        try:
            config = self.overrides.apply(load_config(Path(config_path)))
            meta["overrides"] = dict(self.overrides.applied)
            logging.getLogger().setLevel(self.overrides.resolve_log_level(config))
            repository = self.repository_factory(Path(out_dir), config.max_nodes)
            repository.initialize()
            outcome = self.execute_command(config, repository)
            if outcome.failure is not None:
                error = self._record_error(outcome.failure, config.subcommand)
        except Exception as exc:
            error = self._record_error(exc, config.subcommand if config else "")
            self.logger.debug("Run aborted", exc_info=True)

        if repository is None:
            try:
                repository = self.repository_factory(Path(out_dir), DEFAULT_MAX_NODES)
                repository.initialize()
            except OSError as exc:
                error = error or self._record_error(exc, "")
                return self._finish(CommandResult(False, error=error, exit_code=error.exit_code),
                                    start_time)

        document = self._report_document(config, outcome, error, repository)
        repository.write_report(document)
        meta.update(
            finished_at=datetime.now(timezone.utc).isoformat(),
            timings={"total_seconds": time.perf_counter() - start_time, **outcome.meta},
            exit_code=error.exit_code if error else 0,
        )
        repository.write_meta(meta)

        result = CommandResult(
            success=error is None,
            output=document,
            error=error,
            exit_code=error.exit_code if error else 0,
            metadata={"subcommand": config.subcommand if config else None,
                      "files": repository.written_files()},
        )
        return self._finish(result, start_time)

    def execute_command(self, config: RunConfig,
                        repository: IReportRepository) -> WorkflowOutcome:
        """Dispatch to the use case registered for config.subcommand"""
        command = config.subcommand
        if not self.validate_command(command):
            raise ValueError(f"No handler found for command: {command}")
        self.logger.info(f"Running {command} (n={config.n}, seed={config.seed})")
        handler = self._commands[command]["handler"]
        return handler(self.display_service, repository).execute(config)

    def _report_document(self, config: Optional[RunConfig], outcome: WorkflowOutcome,
                         error: Optional[RunError],
                         repository: IReportRepository) -> Dict[str, Any]:
        """report.json body; timestamps stay in meta.json"""
        document: Dict[str, Any] = {
            "version": __version__,
            "subcommand": config.subcommand if config else None,
            "config": ConfigService(config).to_document() if config else None,
            "complete": error is None,
            "result": outcome.record,
            "files": sorted(set(repository.written_files()) | {"meta.json", "report.json"}),
        }
        if error is not None:
            document["error"] = {
                "type": error.error_type.value,
                "message": error.message,
                "exit_code": error.exit_code,
            }
        return document

    def _record_error(self, exc: BaseException, command: str) -> RunError:
        error = self.error_handler.create_error(exc, command=command)
        self.error_handler.store_error(error)
        self.logger.error(f"Command failed: {command or '<config>'} - {error.message}")
        return error

    def _finish(self, result: CommandResult, start_time: float) -> CommandResult:
        result.execution_time = time.perf_counter() - start_time
        if result.error is not None:
            self.display_service.display_run_error(result.error)
        else:
            self.display_service.display_success(
                f"{result.metadata.get('subcommand')} finished in {result.execution_time:.1f}s"
            )
        return result
