#!/usr/bin/env python3
"""Run the acceptance suite and print one pass/fail line per criterion."""
import sys
from pathlib import Path

import pytest

if __name__ == "__main__":
    tests = Path(__file__).resolve().parents[1] / "tests" / "test_acceptance.py"
    sys.exit(pytest.main(["-q", str(tests), *sys.argv[1:]]))
