"""Lister."""
import subprocess

__all__ = ["listing"]


def listing(command: str) -> bytes:
    """Output of a listing command."""
    return subprocess.check_output(command, shell=True)
