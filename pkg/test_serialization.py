#!/usr/bin/env python3
"""
Tests for the JSON and CSV array codecs and the shipped table fixtures
"""

import json
from fractions import Fraction

import pytest

from bananaworld.correlation_core import FLOAT, RATIONAL, CorrelationArray, table
from bananaworld.errors import SerializationError
from bananaworld.serialization import (array_from_csv, array_to_csv, array_to_dict, dumps_array,
                                       load_array, loads_array, save_array, complex_from_json,
                                       complex_to_json)


@pytest.mark.parametrize("number", [1, 2, 3, 4])
def test_fixture_files_match_tables(table_path, number):
    assert load_array(table_path(number)) == table(number)


def test_rational_json_is_bit_exact():
    array = CorrelationArray([Fraction(1, 3), Fraction(2, 3), Fraction(0), Fraction(0)] * 4)
    assert loads_array(dumps_array(array)) == array
    assert array_to_dict(array)["entries"][0]["p"] == "1/3"


def test_float_json_keeps_representation():
    array = table(1).to_float()
    restored = loads_array(dumps_array(array))
    assert restored.representation == FLOAT
    assert restored == array


def test_csv_rational_detection():
    text = array_to_csv(table(1))
    assert text.splitlines()[0] == "a,b,x,y,p"
    restored = array_from_csv(text)
    assert restored.representation == RATIONAL
    assert restored == table(1)


def test_csv_with_decimals_is_float():
    text = array_to_csv(table(1)).replace("1/2", "0.5")
    restored = array_from_csv(text)
    assert restored.representation == FLOAT
    assert restored.allclose(table(1), 1e-15)


def test_save_and_load_csv(tmp_path):
    path = tmp_path / "epr.csv"
    save_array(table(4), path, fmt="csv")
    assert load_array(path) == table(4)


@pytest.mark.parametrize("payload", [
    {"scenario": "3x3", "representation": "rational", "entries": []},
    {"scenario": "2x2x2x2", "representation": "complex", "entries": []},
    {"scenario": "2x2x2x2", "representation": "rational", "entries": [{"a": 0}] * 16},
])
def test_malformed_payloads(payload):
    with pytest.raises(SerializationError):
        loads_array(json.dumps(payload))


def test_float_value_in_rational_payload():
    payload = array_to_dict(table(1))
    payload["entries"][0]["p"] = 0.5
    with pytest.raises(SerializationError):
        loads_array(json.dumps(payload))


def test_duplicate_entry_rejected():
    payload = array_to_dict(table(2))
    payload["entries"][1] = dict(payload["entries"][0])
    with pytest.raises(SerializationError, match="duplicate"):
        loads_array(json.dumps(payload))


def test_invalid_json_text():
    with pytest.raises(SerializationError):
        loads_array("{not json")


def test_missing_file(tmp_path):
    with pytest.raises(SerializationError):
        load_array(tmp_path / "missing.json")


def test_complex_pairs():
    assert complex_to_json(1 - 2j) == [1.0, -2.0]
    assert complex_from_json([0.5, 0.25]) == 0.5 + 0.25j
    with pytest.raises(SerializationError):
        complex_from_json([1.0])
