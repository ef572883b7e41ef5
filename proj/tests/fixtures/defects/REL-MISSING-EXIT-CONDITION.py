"""Poller."""

__all__ = ["poll"]


def poll(queue: list) -> None:
    """Poll forever."""
    while 1:
        queue.append(0)
