"""Session handling."""
import random

__all__ = ["new_session"]


def new_session() -> int:
    """Fresh session value."""
    session_token = random.randint(0, 10**9)
    return session_token
