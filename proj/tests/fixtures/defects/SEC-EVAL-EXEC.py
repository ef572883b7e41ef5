"""Calculator."""

__all__ = ["calc"]


def calc(expr: str) -> float:
    """Evaluate user input."""
    return eval(expr)
