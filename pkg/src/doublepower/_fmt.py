"""Deterministic machine output: floats at 17 significant digits, JSON
with stable key order.  Shared by the sweep CSV writer and the CLI so
that re-serializing parsed output reproduces identical bytes.
"""

from __future__ import annotations

import math


def format_float(x: float) -> str:
    """17 significant digits, enough to round-trip any double exactly."""
    return "%.17g" % float(x)


def json_text(obj) -> str:
    """Minimal JSON writer with %.17g floats.

    The stdlib encoder serializes floats via repr (shortest round trip),
    which does not match the fixed 17-digit contract used in the CSV
    output, so numbers are formatted here instead.  Keys keep insertion
    order; callers are responsible for building dicts deterministically.
    """
    pieces: list[str] = []
    _write(obj, pieces)
    return "".join(pieces)


def _write(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):  # bool before int, it is a subclass
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            # JSON has no inf/nan; emit null rather than invalid tokens
            out.append("null")
        else:
            out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(_escape(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(",")
            out.append(_escape(str(k)))
            out.append(":")
            _write(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _write(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape(s: str) -> str:
    parts = ['"']
    for ch in s:
        if ch in _ESCAPES:
            parts.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            parts.append("\\u%04x" % ord(ch))
        else:
            parts.append(ch)
    parts.append('"')
    return "".join(parts)
