"""Dense matrix arithmetic on nested lists."""

__all__ = ["identity", "multiply", "transpose"]


def identity(n: int) -> list[list[float]]:
    """n by n identity."""
    return [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]


def transpose(m: list[list[float]]) -> list[list[float]]:
    """Rows become columns."""
    return [list(col) for col in zip(*m)]


def multiply(a: list[list[float]], b: list[list[float]]) -> list[list[float]]:
    """Matrix product; raises ValueError on shape mismatch."""
    if a and len(a[0]) != len(b):
        raise ValueError("shape mismatch")
    cols = transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) for col in cols] for row in a]
