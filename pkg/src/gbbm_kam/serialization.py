"""Deterministic JSON and CSV output, plus schema validation.

JSON is written with sorted keys and every float rendered with 17
significant digits, so an identical configuration yields byte-identical
files.  Exact rationals travel as ``{"num": "...", "den": "..."}`` strings.
"""
from __future__ import annotations

import csv
import json
import math
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np


def rational(q: Fraction, pi_pow: int | None = None) -> dict:
    out = {"num": str(q.numerator), "den": str(q.denominator)}
    if pi_pow is not None:
        out["pi_pow"] = pi_pow
    return out


def parse_rational(d: dict) -> Fraction:
    return Fraction(int(d["num"]), int(d["den"]))


def _plain(obj):
    """Convert numpy scalars, tuples and Fractions into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, Fraction):
        return rational(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(obj, indent: int, level: int, out: list) -> None:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, k in enumerate(sorted(obj)):
            out.append(f"{pad}{json.dumps(k)}: ")
            _emit(obj[k], indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    elif isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        out.append(json.dumps(obj))
    elif isinstance(obj, float):
        # JSON has no NaN or infinity
        out.append(format(obj, ".17g") if math.isfinite(obj) else "null")
    else:  # pragma: no cover - _plain guards this
        raise TypeError(type(obj).__name__)


def dumps(obj, indent: int = 2) -> str:
    out: list[str] = []
    _emit(_plain(obj), indent, 0, out)
    return "".join(out) + "\n"


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("gbbm_kam").joinpath("schemas", f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate(obj, name: str) -> None:
    """Raise ``jsonschema.ValidationError`` if ``obj`` violates schema ``name``."""
    jsonschema.validate(json.loads(dumps(obj)), load_schema(name))


# ---------------------------------------------------------------------------
# trajectory CSV

CSV_COLUMNS = ("t", "re_z_n1", "im_z_n1", "re_z_n2", "im_z_n2", "H", "E1")


def write_trajectory_csv(path: str | Path, times, z1, z2, H, E1) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in zip(times, z1.real, z1.imag, z2.real, z2.imag, H, E1):
            w.writerow([format(float(v), ".17g") for v in row])


def read_trajectory_csv(path: str | Path) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh))
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected trajectory columns {header}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    cols = {name: data[:, i] for i, name in enumerate(CSV_COLUMNS)}
    return {
        "t": cols["t"],
        "z_n1": cols["re_z_n1"] + 1j * cols["im_z_n1"],
        "z_n2": cols["re_z_n2"] + 1j * cols["im_z_n2"],
        "H": cols["H"],
        "E1": cols["E1"],
    }
