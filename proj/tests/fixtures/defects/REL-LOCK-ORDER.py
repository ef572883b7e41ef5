"""Transfers."""
import threading

__all__ = ["LOCK_A", "LOCK_B", "forward", "backward"]

LOCK_A = threading.Lock()
LOCK_B = threading.Lock()


def forward(log: list) -> None:
    """A then B."""
    with LOCK_A:
        with LOCK_B:
            log.append(1)


def backward(log: list) -> None:
    """B then A."""
    with LOCK_B:
        with LOCK_A:
            log.append(2)
