# utils/__init__.py
from .errors import (
    FibratoError,
    SchemaError,
    InconsistencyError,
    ConfidenceError,
    OutOfScopeError,
)
from .logs import get_logger
