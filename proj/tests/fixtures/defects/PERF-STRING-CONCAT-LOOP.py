"""CSV rendering."""

__all__ = ["render"]


def render(rows: list) -> str:
    """Rows joined by newlines."""
    text = ""
    for row in rows:
        text += str(row) + "\n"
    return text
