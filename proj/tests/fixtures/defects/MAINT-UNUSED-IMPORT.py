"""Path helpers."""
import os

__all__ = ["stem"]


def stem(name: str) -> str:
    """Name without extension."""
    return name.rsplit(".", 1)[0]
