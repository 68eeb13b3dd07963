"""
Shared pytest fixtures for the Bananaworld Correlation Analyzer tests
"""

import os
import sys
from pathlib import Path

import pytest

# Add the current directory to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from bananaworld.correlation_core import table  # noqa: E402
from bananaworld.polytopes import enumerate_deterministic  # noqa: E402

ROOT = Path(__file__).resolve().parent
TABLES_DIR = ROOT / "tables"

# read-only reference tree, not part of this suite
collect_ignore = ["examples"]


@pytest.fixture
def tables():
    return {n: table(n) for n in (1, 2, 3, 4)}


@pytest.fixture
def local_vertex_arrays():
    return [v.to_array() for v in enumerate_deterministic("local")]


@pytest.fixture
def table_path():
    def _path(n: int) -> str:
        return str(TABLES_DIR / f"table{n}.json")
    return _path
