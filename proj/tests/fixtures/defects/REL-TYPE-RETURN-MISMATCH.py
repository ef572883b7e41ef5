"""Labels."""

__all__ = ["label"]


def label() -> int:
    """Label text."""
    return "x"
