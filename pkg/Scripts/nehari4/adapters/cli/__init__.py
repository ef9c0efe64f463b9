"""
Nehari4 CLI Adapters
Adapters for command-line interface integration
"""

from .command_adapter import CommandAdapter

__all__ = [
    'CommandAdapter',
]
