"""Safe parse."""

__all__ = ["parse_int"]


def parse_int(text: str) -> int:
    """Integer or zero."""
    try:
        return int(text)
    except Exception:
        return 0
