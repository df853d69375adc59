"""White-box validation of quantitative product-line models.

Simulate a model under statistical model checking, mine the simulation logs
into a process graph and diff it against the specified behaviour.
"""

from .errors import DecodeError, EvalError, LogFormatError, ParseError, QFMineError, ResolutionError
from .model import Configuration, Model, validate_static
from .parser import parse_model, parse_query, pretty_print

__version__ = "0.1.0"

__all__ = [
    "Configuration",
    "DecodeError",
    "EvalError",
    "LogFormatError",
    "Model",
    "ParseError",
    "QFMineError",
    "ResolutionError",
    "model_path",
    "parse_model",
    "parse_query",
    "pretty_print",
    "validate_static",
]


def model_path(name: str) -> str:
    """Filesystem path of a shipped example model, e.g. ``model_path("vending10")``."""
    from importlib.resources import files

    return str(files(__package__) / "models" / f"{name}.qfl")
