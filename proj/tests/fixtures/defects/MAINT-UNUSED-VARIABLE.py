"""Totals."""

__all__ = ["total"]


def total(values: list) -> int:
    """Sum of values."""
    count = len(values)
    return sum(values)
