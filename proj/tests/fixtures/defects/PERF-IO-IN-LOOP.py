"""Log appender."""

__all__ = ["append_all"]


def append_all(lines: list) -> None:
    """Append every line to the log."""
    for line in lines:
        with open("app.log", "a") as fh:
            fh.write(line)
