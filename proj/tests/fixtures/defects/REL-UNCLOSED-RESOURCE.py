"""Config reader."""

__all__ = ["first_line"]


def first_line(path: str) -> str:
    """First line of a file."""
    fh = open(path)
    line = fh.readline()
    return line
