"""
Nehari4 Adapters
Adapters for external systems following hexagonal architecture
"""

from .cli import CommandAdapter

__all__ = [
    'CommandAdapter',
]
