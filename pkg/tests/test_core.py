"""Container lifecycle and the application wrapper."""
import pytest

from nehari4.core import ApplicationConfig, Nehari4Application, Nehari4Container
from nehari4.core.ports import ICommandService, IDisplayService
from nehari4.domain import IErrorHandler
from nehari4.infrastructure import ErrorHandler, RichDisplayService

pytestmark = pytest.mark.unit


def test_services_resolve_after_initialize():
    container = Nehari4Container()
    display = RichDisplayService(quiet=True)
    container.register_singleton(IDisplayService, display)
    container.register_singleton(IErrorHandler, ErrorHandler())
    with pytest.raises(RuntimeError, match="not initialized"):
        container.get_service(IDisplayService)
    container.initialize()
    assert container.get_service(IDisplayService) is display
    assert container.registered() == ["IDisplayService", "IErrorHandler"]
    with pytest.raises(ValueError, match="ICommandService"):
        container.get_service(ICommandService)
    container.cleanup()
    assert not container.initialized


def test_registration_checks_the_port():
    with pytest.raises(TypeError, match="IDisplayService"):
        Nehari4Container().register_singleton(IDisplayService, ErrorHandler())


def test_application_needs_start_before_execute(tmp_path):
    app = Nehari4Application(ApplicationConfig(log_level="WARNING"), Nehari4Container())
    with pytest.raises(RuntimeError, match="not running"):
        app.execute(tmp_path / "run.json", tmp_path / "out")
    app.start()
    assert app.is_running
    app.stop()
    assert not app.is_running
