"""
Nehari4 Application
Main application class with dependency injection
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .container import Nehari4Container
from .ports import CommandResult, ICommandService

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


@dataclass
class ApplicationConfig:
    """Application configuration"""
    debug: bool = False
    log_level: str = "INFO"
    quiet: bool = False


class Nehari4Application:
    """Runs one workflow through the registered command service"""

    def __init__(self, config: ApplicationConfig, container: Nehari4Container):
        self.config = config
        self.container = container
        self.logger = logging.getLogger(__name__)
        self.is_running = False

        logging.basicConfig(
            level=logging.DEBUG if config.debug else getattr(logging, config.log_level, logging.INFO),
            format=LOG_FORMAT
        )

    def start(self) -> None:
        if self.is_running:
            return
        self.logger.debug("Starting nehari4 application...")
        self.container.initialize()
        self.is_running = True

    def stop(self) -> None:
        if not self.is_running:
            return
        self.container.cleanup()
        self.is_running = False
        self.logger.debug("nehari4 application stopped")

    def execute(self, config_path: Path, out_dir: Path) -> CommandResult:
        """Run one config document; the application must be started"""
        if not self.is_running:
            raise RuntimeError("Application is not running")
        command_service = self.container.get_service(ICommandService)
        return command_service.run(Path(config_path), Path(out_dir))

    def run(self, config_path: Path, out_dir: Path) -> int:
        """Start, execute, stop; returns the process exit code"""
        self.start()
        try:
            result = self.execute(config_path, out_dir)
        finally:
            self.stop()
        self.logger.debug(f"Exit code {result.exit_code} after {result.execution_time:.2f}s")
        return result.exit_code

    def get_service(self, service_type: Any) -> Any:
        return self.container.get_service(service_type)
