"""Archiver."""
import os

__all__ = ["archive"]


def archive(command: str) -> int:
    """Run an archiving command."""
    return os.system(command)
