"""Deterministic JSON and CSV output.

Keys are sorted, floats are written with 17 significant digits and complex
numbers as ``[re, im]`` pairs, so identical inputs give identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction

import numpy as np

from . import __version__

__all__ = ["SCHEMA", "dumps", "to_plain", "csv_rows", "provenance"]

SCHEMA = 1


def provenance(**extra):
    from . import kernels
    out = {"package": "helmshape", "version": __version__, "schema": SCHEMA,
           "kernels": kernels.BACKEND}
    out.update(extra)
    return out


def to_plain(obj):
    """Convert numpy scalars/arrays, complex numbers and fractions to JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, Fraction):
        return str(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_json"):
        return to_plain(obj.to_json())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _float(x):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _write(obj, out, indent, level):
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," if indent else ", "
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, k in enumerate(sorted(obj)):
            out.append((sep if i else "") + pad + json.dumps(k) + ": ")
            _write(obj[k], out, indent, level + 1)
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        out.append("[")
        for i, v in enumerate(obj):
            out.append((sep if i else "") + pad)
            _write(v, out, indent, level + 1)
        out.append(end + "]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_float(obj))
    else:
        out.append(json.dumps(obj, ensure_ascii=False))


def dumps(obj, indent=2):
    out = []
    _write(to_plain(obj), out, indent, 0)
    return "".join(out) + "\n"


def csv_rows(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(x, ".17g") if isinstance(x, float) else x for x in r])
    return buf.getvalue()
