"""Deterministic JSON and CSV output."""

from __future__ import annotations

import csv
import io
import json
import math
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence

import numpy as np

FORMAT_VERSION = 1


def _float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = "%.17g" % x
    # keep floats recognisable as floats after a round trip
    if "." not in s and "e" not in s and "n" not in s:
        s += ".0"
    return s


def _encode(obj: Any, out: list) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, Enum):
        _encode(obj.value, out)
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float(float(obj)))
    elif isinstance(obj, (str, Fraction)):
        out.append(json.dumps(str(obj)))
    elif isinstance(obj, dict):
        out.append("{")
        for k, key in enumerate(sorted(obj, key=str)):
            if k:
                out.append(", ")
            out.append(json.dumps(str(key)) + ": ")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for k, item in enumerate(obj):
            if k:
                out.append(", ")
            _encode(item, out)
        out.append("]")
    elif hasattr(obj, "to_json"):
        _encode(obj.to_json(), out)
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """JSON with sorted keys and floats at 17 significant digits."""
    out: list = []
    _encode(obj, out)
    return "".join(out)


def report_document(command: str, system: Optional[dict] = None, verdicts: Sequence[Any] = (),
                    extra: Optional[dict] = None, seed: Optional[int] = None) -> dict:
    doc = {
        "format": FORMAT_VERSION,
        "command": command,
        "system": system,
        "seed": seed,
        "verdicts": [v.to_json() if hasattr(v, "to_json") else v for v in verdicts],
    }
    if extra:
        doc.update(extra)
    return doc


def empty_report(command: str) -> dict:
    return report_document(command)


def write_json(doc: Any, path: Optional[str], stream=None) -> str:
    text = dumps(doc) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    if stream is not None:
        stream.write(text)
    return text


def series_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_float(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(series_csv(header, rows))
