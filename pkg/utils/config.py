# utils/config.py
from __future__ import annotations

import os

from sympy import isprime

from utils.errors import SchemaError

# ========================================
# ⚙️ ENGINE DEFAULTS (env overridable)
# ========================================
DEFAULT_PRIME = int(os.getenv("FIBRATO_DEFAULT_PRIME", "2147483647"))
DEFAULT_SEED = int(os.getenv("FIBRATO_SEED", "7"))
DEFAULT_SAMPLES = int(os.getenv("FIBRATO_SAMPLES", "1000"))
DEFAULT_LINES = int(os.getenv("FIBRATO_LINES", "100"))
DEFAULT_TRIALS = int(os.getenv("FIBRATO_TRIALS", "3"))
DEFAULT_MAX_FAILURE = float(os.getenv("FIBRATO_MAX_FAILURE", "1e-9"))
EXACT_GCD = os.getenv("FIBRATO_EXACT_GCD", "0").strip().lower() in {"1", "true", "yes", "on"}
WORKERS = max(1, int(os.getenv("FIBRATO_WORKERS", "1")))
LOG_LEVEL = os.getenv("FIBRATO_LOG_LEVEL", "INFO").upper()

# residues are multiplied in int64
MAX_NUMPY_PRIME = 2**31


def validate_prime(p: int) -> int:
    """Reject moduli the sampling kernels cannot use."""
    try:
        p = int(p)
    except (TypeError, ValueError):
        raise SchemaError(f"prime must be an integer, got {p!r}")
    if p <= 2 or not isprime(p):
        raise SchemaError(f"{p} is not an odd prime")
    if p >= MAX_NUMPY_PRIME:
        raise SchemaError(f"prime {p} must be below 2^31")
    return p
