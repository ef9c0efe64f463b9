"""
Nehari4 Dependency Injection Container
Holds the services of one process: display, error handler, command service
"""
import logging
from typing import Any, Dict, List, Type, TypeVar

T = TypeVar("T")


class Nehari4Container:
    """Singleton registry keyed by port type, synchronous lifecycle"""

    def __init__(self) -> None:
        self._singletons: Dict[Type, Any] = {}
        self._initialized = False
        self.logger = logging.getLogger(__name__)

    @property
    def initialized(self) -> bool:
        return self._initialized

    def register_singleton(self, interface: Type[T], implementation: T) -> None:
        if not isinstance(implementation, interface):
            raise TypeError(
                f"{type(implementation).__name__} does not implement {interface.__name__}"
            )
        self._singletons[interface] = implementation
        self.logger.debug(
            f"Registered singleton: {interface.__name__} -> {type(implementation).__name__}"
        )

    def get_service(self, interface: Type[T]) -> T:
        if not self._initialized:
            raise RuntimeError("Container not initialized. Call initialize() first.")
        try:
            return self._singletons[interface]
        except KeyError:
            raise ValueError(f"Service not registered: {interface.__name__}") from None

    def registered(self) -> List[str]:
        return sorted(interface.__name__ for interface in self._singletons)

    def initialize(self) -> None:
        """Call initialize() on every singleton exposing one, in registration order"""
        if self._initialized:
            return
        for interface, instance in self._singletons.items():
            hook = getattr(instance, "initialize", None)
            if callable(hook):
                hook()
                self.logger.debug(f"Initialized service: {interface.__name__}")
        self._initialized = True
        self.logger.debug(f"Container initialized with {len(self._singletons)} services")

    def cleanup(self) -> None:
        """Reverse-order cleanup; failures are logged and do not stop the others"""
        for interface, instance in reversed(list(self._singletons.items())):
            hook = getattr(instance, "cleanup", None)
            if not callable(hook):
                continue
            try:
                hook()
            except Exception as e:
                self.logger.error(f"Failed to cleanup {interface.__name__}: {e}")
        self._initialized = False
