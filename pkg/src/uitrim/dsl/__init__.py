"""Restricted language for bottom-up UI tree transformation programs."""

from .ast import (
    DEFAULT_LEAF_PROPS,
    FALSE,
    TRUE,
    PropertyRules,
    TransformProgram,
    format_expr,
    format_library,
    format_program,
    identity_program,
)
from .enumerate import Vocabulary, enumerate_grammar
from .parser import (
    DepthExceeded,
    ProgramSyntaxError,
    parse_condition,
    parse_library,
    parse_program,
)
from .validate import Violation, validate_program

__all__ = [
    "DEFAULT_LEAF_PROPS",
    "FALSE",
    "TRUE",
    "DepthExceeded",
    "ProgramSyntaxError",
    "PropertyRules",
    "TransformProgram",
    "Violation",
    "Vocabulary",
    "enumerate_grammar",
    "format_expr",
    "format_library",
    "format_program",
    "identity_program",
    "parse_condition",
    "parse_library",
    "parse_program",
    "validate_program",
]
