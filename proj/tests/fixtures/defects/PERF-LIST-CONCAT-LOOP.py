"""Squares."""

__all__ = ["squares"]


def squares(n: int) -> list:
    """First n squares."""
    out = []
    for i in range(n):
        out = out + [i * i]
    return out
