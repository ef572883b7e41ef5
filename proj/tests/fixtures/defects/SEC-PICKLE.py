"""Cache loader."""
import pickle

__all__ = ["load"]


def load(blob: bytes) -> object:
    """Restore a cached object."""
    return pickle.loads(blob)
