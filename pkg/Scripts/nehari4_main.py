"""
nehari4 - Main Entry Point
nehari4 --config run.json --out dir/
"""
import argparse
import sys
from pathlib import Path
from typing import List, Optional

# Add the nehari4 package to Python path when run as a script
sys.path.insert(0, str(Path(__file__).parent))

from nehari4 import __version__
from nehari4.adapters import CommandAdapter
from nehari4.core import ApplicationConfig, Nehari4Application, Nehari4Container
from nehari4.core.ports import ICommandService, IDisplayService
from nehari4.domain import ConfigError, IErrorHandler
from nehari4.infrastructure import ErrorHandler, RichDisplayService, RuntimeOverrides


class Nehari4Cli:
    """Wires services into the container and runs the application"""

    def __init__(self, overrides: RuntimeOverrides, quiet: bool = False):
        self.overrides = overrides
        self.config = ApplicationConfig(
            debug=overrides.debug,
            log_level=overrides.resolve_log_level(),
            quiet=quiet,
        )
        self.container = Nehari4Container()
        self._setup_services()
        self.app = Nehari4Application(self.config, self.container)

    def _setup_services(self) -> None:
        display_service = RichDisplayService(quiet=self.config.quiet)
        error_handler = ErrorHandler()
        command_adapter = CommandAdapter(display_service, error_handler, self.overrides)

        self.container.register_singleton(IDisplayService, display_service)
        self.container.register_singleton(IErrorHandler, error_handler)
        self.container.register_singleton(ICommandService, command_adapter)

    def run(self, config_path: Path, out_dir: Path) -> int:
        return self.app.run(config_path, out_dir)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nehari4",
        description="Nehari-manifold and mountain-pass toolkit for fourth-order elliptic "
                    "equations with critical growth",
    )
    parser.add_argument("--config", required=True, type=Path,
                        help="run document (JSON, or YAML by .yaml/.yml suffix)")
    parser.add_argument("--out", required=True, type=Path,
                        help="output directory for report.json, meta.json, snapshots and CSVs")
    parser.add_argument("--quiet", action="store_true", help="suppress console summaries")
    parser.add_argument("--version", action="version", version=f"nehari4 {__version__}")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = RuntimeOverrides.from_environment()
    except ConfigError as exc:
        RichDisplayService().display_error(str(exc))
        return exc.exit_code
    return Nehari4Cli(overrides, quiet=args.quiet).run(args.config, args.out)


if __name__ == "__main__":
    sys.exit(main())
