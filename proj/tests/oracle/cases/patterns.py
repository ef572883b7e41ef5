"""Pattern shapes for the parser differential."""


def classify(value, point, config):
    match value:
        case 0 | 1 | -2:
            kind = "small"
        case 1.5 + 2j:
            kind = "complex"
        case None | True | False:
            kind = "singleton"
        case "a" "b":
            kind = "joined"
        case [first, *rest] if rest:
            kind = first
        case (x, _, *_):
            kind = x
        case (inner):
            kind = inner
        case [[a, b], (c,)] as nested:
            kind = (a, b, c, nested)
        case {"k": v, **extra}:
            kind = (v, extra)
        case {1: _, "q": [*_]}:
            kind = "keys"
        case Point(x=0, y=py) | Point(0, py):
            kind = py
        case str() | bytes():
            kind = "text"
        case config.Mode.ON:
            kind = "on"
        case _:
            kind = None
    match point, config:
        case a, b:
            return kind, a, b
    match (point):
        case {
            "multi": line_value,
            **others
        }:
            return others
