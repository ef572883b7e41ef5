"""Countdown."""

__all__ = ["countdown"]


def countdown(n: int, out: list) -> None:
    """Emit n values."""
    while n > 0:
        out.append(1)
