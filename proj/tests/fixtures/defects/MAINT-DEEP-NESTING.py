"""Grid scan."""

__all__ = ["count_hits"]


def count_hits(grid: list, flags: list) -> int:
    """Number of flagged positive cells."""
    hits = 0
    for row in grid:
        for cell in row:
            if cell > 0:
                try:
                    if cell in flags:
                        hits += 1
                finally:
                        flags.sort()
    return hits
