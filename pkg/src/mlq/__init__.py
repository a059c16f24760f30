"""mlq: a textual modeling language for event-driven things with declarative
ML blocks, plus the tooling around it (validator, simulator, code generator,
CLI and HTTP service)."""

__version__ = "0.1.0"

from mlq.nodes import Model, model_equals
from mlq.parser import parse
from mlq.printer import pretty_print
from mlq.resolve import resolve_references
from mlq.validator import validate

__all__ = [
    "Model",
    "model_equals",
    "parse",
    "pretty_print",
    "resolve_references",
    "validate",
    "__version__",
]
