"""Point helpers."""

__all__ = ["make_box"]


def make_box(x: int, y: int, z: int, w: int, h: int, d: int) -> tuple:
    """Box tuple."""
    return (x, y, z, w, h, d)
