"""Flag rendering."""

__all__ = ["render"]


def render(flags: list, out: list) -> None:
    """Append one marker per flag."""
    a, b, c, d, e = flags
    if a:
        out.append("a")
    else:
        out.append("-")
    if b:
        out.append("b")
    else:
        out.append("-")
    if c:
        out.append("c")
    else:
        out.append("-")
    if d:
        out.append("d")
    else:
        out.append("-")
    if e:
        out.append("e")
    else:
        out.append("-")
    if out:
        out.append("|")
    else:
        out.append(".")
    if len(out) > 3:
        out.append("!")
    else:
        out.append("?")
