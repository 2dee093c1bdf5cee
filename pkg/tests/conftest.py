# tests/conftest.py
import os
import sys
from pathlib import Path

# in-memory database for the API tests; must be set before `database` is imported
os.environ.setdefault("DATABASE_URL", "sqlite://")
os.environ.setdefault("FIBRATO_LOG_LEVEL", "WARNING")

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))
