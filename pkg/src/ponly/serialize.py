"""Deterministic text serialization for output artifacts.

Floats are written with 17 significant digits so that every artifact
round-trips exactly and re-running a command with the same config and seed
reproduces the output byte for byte.
"""

import numpy as np

def fmt(x):
    """Render a scalar for CSV/JSON output."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    raise TypeError(f"unsupported scalar {type(x).__name__}")


def dumps(obj, indent=0, compact=False):
    """Minimal JSON emitter with deterministic float formatting.

    Supports dict / list / str / numbers / bool / None / numpy scalars and
    1-d arrays. Dict key order is preserved (callers build dicts in a fixed
    order). ``compact`` renders everything on one line (for JSON lines).
    """
    pad = " " * indent
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return _quote(obj)
    if isinstance(obj, (bool, np.bool_)):
        return fmt(obj)
    if isinstance(obj, (int, np.integer, float, np.floating)):
        v = fmt(obj)
        if isinstance(obj, (float, np.floating)) and not np.isfinite(obj):
            return _quote(v)  # JSON has no inf/nan literals
        return v
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        items = [dumps(v, compact=compact) for v in obj]
        return "[" + ", ".join(items) + "]"
    if isinstance(obj, dict):
        if compact:
            inner = ", ".join(
                f"{_quote(str(k))}: {dumps(v, compact=True)}"
                for k, v in obj.items()
            )
            return "{" + inner + "}"
        inner = ",\n".join(
            f"{pad}  {_quote(str(k))}: {dumps(v, indent + 2)}"
            for k, v in obj.items()
        )
        if inner:
            return "{\n" + inner + "\n" + pad + "}"
        return "{}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _quote(s):
    out = []
    for ch in s:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    return '"' + "".join(out) + '"'
