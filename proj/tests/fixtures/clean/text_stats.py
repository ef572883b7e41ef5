"""Word statistics for plain text."""
import re
from collections import Counter

__all__ = ["tokenize", "top_words", "summary"]

WORD = re.compile(r"[a-z']+")


def tokenize(text: str) -> list[str]:
    """Lowercase word tokens."""
    return WORD.findall(text.lower())


def top_words(text: str, limit: int = 10) -> list[tuple[str, int]]:
    """Most frequent words, ties broken alphabetically."""
    counts = Counter(tokenize(text))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:limit]


def summary(text: str) -> str:
    """One-line description of a text."""
    words = tokenize(text)
    if not words:
        return "empty"
    parts = [f"{len(words)} words", f"{len(set(words))} distinct"]
    longest = max(words, key=len)
    parts.append(f"longest '{longest}'")
    return ", ".join(parts)
