"""Deterministic JSON and CSV emission.

JSON: UTF-8, sorted keys, reals with 17 significant digits, non-finite
reals as null.  CSV: RFC 4180 (CRLF line ends, minimal quoting) with a
header row.
"""

from __future__ import annotations

import csv
import json
import math
from typing import Any, Iterable, TextIO

import numpy as np


def format_real(v: float) -> str | None:
    v = float(v)
    if not math.isfinite(v):
        return None
    s = format(v, ".17g")
    # keep reals distinguishable from integers when read back
    if all(ch not in s for ch in ".e"):
        s += ".0"
    return s


def _plain(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return _plain(obj.item())
    if isinstance(obj, complex):
        return {"im": obj.imag, "re": obj.real}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _encode(obj: Any, indent: int, level: int, out: list[str]) -> None:
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_real(obj) or "null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            out.append(("," if i else "") + pad + json.dumps(key, ensure_ascii=False) + ": ")
            _encode(obj[key], indent, level + 1, out)
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            out.append("[" + ", ".join(format_real(v) or "null" if isinstance(v, float) else str(v)
                                       for v in obj) + "]")
            return
        out.append("[")
        for i, v in enumerate(obj):
            out.append(("," if i else "") + pad)
            _encode(v, indent, level + 1, out)
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj: Any, indent: int = 2) -> str:
    out: list[str] = []
    _encode(_plain(obj), indent, 0, out)
    return "".join(out) + "\n"


def write_json(obj: Any, fh: TextIO) -> None:
    fh.write(dumps_json(obj))


def _cell(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return format_real(v) or ""
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(header: Iterable[str], rows: Iterable[Iterable[Any]], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\r\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([_cell(v) for v in row])
