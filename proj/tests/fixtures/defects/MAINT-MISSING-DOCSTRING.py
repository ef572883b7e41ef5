"""Unit conversion."""

__all__ = ["to_celsius"]


def to_celsius(fahrenheit: float) -> float:
    return (fahrenheit - 32) * 5 / 9
