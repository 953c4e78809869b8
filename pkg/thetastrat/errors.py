from __future__ import annotations


class ConfigError(ValueError):
    """Raised when a run configuration does not match the v1 schema."""


class MathPreconditionError(ValueError):
    """Raised when input data violates a mathematical precondition of an operation."""


class IntegerGateError(ArithmeticError):
    """Raised when a quantity that must be an integer is not within tolerance of one."""


EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_PRECONDITION = 3
EXIT_INTEGER_GATE = 4


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, IntegerGateError):
        return EXIT_INTEGER_GATE
    if isinstance(exc, MathPreconditionError):
        return EXIT_PRECONDITION
    return EXIT_SCHEMA


def error_kind(exc: BaseException) -> str:
    if isinstance(exc, IntegerGateError):
        return "integer_gate"
    if isinstance(exc, MathPreconditionError):
        return "precondition"
    return "schema"


__all__ = [
    "ConfigError",
    "EXIT_INTEGER_GATE",
    "EXIT_OK",
    "EXIT_PRECONDITION",
    "EXIT_SCHEMA",
    "IntegerGateError",
    "MathPreconditionError",
    "error_kind",
    "exit_code_for",
]
