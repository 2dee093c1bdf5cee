# utils/errors.py
from __future__ import annotations


class FibratoError(Exception):
    """Base class; carries the CLI exit code and the HTTP status."""

    exit_code = 1
    http_status = 500


class SchemaError(FibratoError):
    exit_code = 2
    http_status = 400


class InconsistencyError(FibratoError):
    """Mathematically inconsistent input or a failed internal identity."""

    exit_code = 3
    http_status = 422


class ConfidenceError(InconsistencyError):
    """Probabilistic answer cannot reach the requested failure bound."""


class OutOfScopeError(FibratoError):
    exit_code = 4
    http_status = 501
