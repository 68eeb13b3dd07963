"""
Serialization for the Bananaworld Correlation Analyzer
JSON and CSV codecs for correlation arrays; rationals travel as "num/den" strings
"""

import csv
import io
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Union

from .constants import ENTRY_KEYS, SCENARIO
from .correlation_core import FLOAT, RATIONAL, CorrelationArray, Scalar
from .errors import BananaworldError, SerializationError

CSV_HEADER = ["a", "b", "x", "y", "p"]


def scalar_to_json(value: Scalar) -> Union[str, float]:
    """Fractions become 'num/den' strings, floats stay numbers"""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return float(value)


def scalar_from_json(value: Any, representation: str) -> Scalar:
    try:
        if representation == RATIONAL:
            if isinstance(value, float):
                raise SerializationError(f"float {value!r} in a rational array")
            return Fraction(value)
        if isinstance(value, str) and "/" in value:
            return float(Fraction(value))
        return float(value)
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise SerializationError(f"bad probability value {value!r}: {e}") from e


def array_to_dict(array: CorrelationArray) -> Dict[str, Any]:
    return {
        "scenario": SCENARIO,
        "representation": array.representation,
        "entries": [
            {"a": a, "b": b, "x": x, "y": y, "p": scalar_to_json(value)}
            for (a, b, x, y), value in zip(ENTRY_KEYS, array.vector())
        ],
    }


def array_from_dict(payload: Dict[str, Any]) -> CorrelationArray:
    if not isinstance(payload, dict):
        raise SerializationError("correlation array JSON must be an object")
    if payload.get("scenario") != SCENARIO:
        raise SerializationError(f"unsupported scenario {payload.get('scenario')!r}")
    representation = payload.get("representation")
    if representation not in (RATIONAL, FLOAT):
        raise SerializationError(f"unknown representation {representation!r}")
    records = payload.get("entries")
    if not isinstance(records, list) or len(records) != 16:
        raise SerializationError("expected 16 entry records")

    values = {}
    for record in records:
        try:
            key = tuple(int(record[k]) for k in ("a", "b", "x", "y"))
            raw = record["p"]
        except (KeyError, TypeError, ValueError) as e:
            raise SerializationError(f"malformed entry record {record!r}") from e
        if any(v not in (0, 1) for v in key):
            raise SerializationError(f"entry indices must be 0 or 1: {record!r}")
        if key in values:
            raise SerializationError(f"duplicate entry {key}")
        values[key] = scalar_from_json(raw, representation)
    try:
        return CorrelationArray(values, representation=representation)
    except BananaworldError as e:
        raise SerializationError(str(e)) from e


def dumps_array(array: CorrelationArray, indent: int = 2) -> str:
    return json.dumps(array_to_dict(array), indent=indent)


def loads_array(text: str) -> CorrelationArray:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise SerializationError(f"invalid JSON: {e}") from e
    return array_from_dict(payload)


def array_to_csv(array: CorrelationArray) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for (a, b, x, y), value in zip(ENTRY_KEYS, array.vector()):
        cell = scalar_to_json(value)
        writer.writerow([a, b, x, y, cell if isinstance(cell, str) else repr(cell)])
    return buffer.getvalue()


def array_from_csv(text: str) -> CorrelationArray:
    """Rows with every p written as an integer or 'num/den' give a rational array"""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != CSV_HEADER:
        raise SerializationError(f"CSV header must be {','.join(CSV_HEADER)}")
    body = [r for r in rows[1:] if r]
    if len(body) != 16:
        raise SerializationError(f"expected 16 CSV rows, got {len(body)}")

    cells = [r[4].strip() for r in body]
    exact = all(_looks_rational(c) for c in cells)
    representation = RATIONAL if exact else FLOAT
    records = []
    for row in body:
        if len(row) != 5:
            raise SerializationError(f"malformed CSV row {row!r}")
        a, b, x, y, p = (c.strip() for c in row)
        records.append({"a": a, "b": b, "x": x, "y": y, "p": p})
    return array_from_dict({"scenario": SCENARIO, "representation": representation,
                            "entries": records})


def _looks_rational(cell: str) -> bool:
    body = cell.lstrip("-")
    if "/" in body:
        num, _, den = body.partition("/")
        return num.isdigit() and den.lstrip("-").isdigit()
    return body.isdigit()


def load_array(path: Union[str, Path]) -> CorrelationArray:
    """Read an array from a .json or .csv file"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SerializationError(f"cannot read {path}: {e}") from e
    if path.suffix.lower() == ".csv":
        return array_from_csv(text)
    return loads_array(text)


def save_array(array: CorrelationArray, path: Union[str, Path], fmt: str = "json") -> None:
    text = array_to_csv(array) if fmt == "csv" else dumps_array(array) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def complex_to_json(value: complex) -> List[float]:
    return [float(value.real), float(value.imag)]


def complex_from_json(pair: List[float]) -> complex:
    try:
        re, im = pair
        return complex(float(re), float(im))
    except (TypeError, ValueError) as e:
        raise SerializationError(f"complex numbers must be [re, im] pairs, got {pair!r}") from e
