"""Worker loop."""

__all__ = ["serve"]


def serve(queue: list) -> None:
    """Process forever."""
    while True:
        queue.append(1)
