"""Deterministic JSON and CSV emission.

Every float is written with 17 significant digits (``%.17g``), which is
enough for exact binary round-trips, and files always use LF line endings.
Identical inputs therefore produce byte-identical files, which the test
suite relies on.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any


def fmt_float(x: float) -> str:
    """Format a finite float with 17 significant digits."""
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"non-finite float not serializable: {x!r}")
    return format(x, ".17g")


def _emit(obj: Any, out: list[str], indent: int | None, level: int) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(fmt_float(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        nl, pad, pad1 = _padding(indent, level)
        out.append("{" + nl)
        for i, (k, v) in enumerate(obj.items()):
            if not isinstance(k, str):
                raise TypeError(f"JSON object keys must be str, got {type(k)}")
            out.append(pad1 + json.dumps(k, ensure_ascii=False) + ": ")
            _emit(v, out, indent, level + 1)
            out.append(("," + nl) if i < len(obj) - 1 else nl)
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            out.append("[]")
            return
        nl, pad, pad1 = _padding(indent, level)
        out.append("[" + nl)
        for i, v in enumerate(obj):
            out.append(pad1)
            _emit(v, out, indent, level + 1)
            out.append(("," + nl) if i < len(obj) - 1 else nl)
        out.append(pad + "]")
    else:
        raise TypeError(f"not JSON-serializable: {type(obj)}")


def _padding(indent: int | None, level: int) -> tuple[str, str, str]:
    if indent is None:
        return "", "", ""
    return "\n", " " * (indent * level), " " * (indent * (level + 1))


def dumps(obj: Any, indent: int | None = None) -> str:
    out: list[str] = []
    _emit(obj, out, indent, 0)
    return "".join(out)


def dump(obj: Any, path: str | Path, indent: int | None = None) -> None:
    text = dumps(obj, indent=indent)
    Path(path).write_text(text + "\n", encoding="utf-8", newline="\n")


def load(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def loads(text: str) -> Any:
    return json.loads(text)


def csv_row(values) -> str:
    """Render one CSV row; floats get the 17-digit treatment."""
    cells = []
    for v in values:
        if isinstance(v, bool):
            cells.append(str(v).lower())
        elif isinstance(v, float):
            cells.append(fmt_float(v))
        else:
            cells.append(str(v))
    return ",".join(cells)
