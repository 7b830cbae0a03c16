"""Run the ten timed acceptance criteria and print one line per criterion."""

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent


if __name__ == "__main__":
    args = ["-q", "-p", "no:cacheprovider", str(ROOT / "tests" / "test_acceptance.py"), *sys.argv[1:]]
    sys.exit(pytest.main(args))
