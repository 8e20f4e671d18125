"""Refinement of abstract constraint specifications into flat int/bool models.

Typical use::

    from essence_refine import refine_text, check_equivalence

    spec, models, warnings = refine_text(source, params)
    report = check_equivalence(spec, models)
"""

from .checker import load
from .emit import FlatModel, print_model, write_models
from .errors import (DanglingBubble, DecodeError, EssenceError, EvalError, NoRepresentation,
                     ParseError, RefinementError, ResourceLimit, TooLarge, TypeCheckError,
                     ValidationError)
from .oracle import (check_equivalence, decode_solution, enumerate_abstract_solutions,
                     solve_refined_model)
from .parser import parse_expr, parse_spec
from .pipeline import RefineConfig, refine, refine_text
from .printer import print_expr, print_spec

__all__ = [
    "load", "parse_spec", "parse_expr", "print_expr", "print_spec", "refine", "refine_text",
    "RefineConfig", "FlatModel", "print_model", "write_models", "check_equivalence",
    "decode_solution", "enumerate_abstract_solutions", "solve_refined_model",
    "EssenceError", "ParseError", "ValidationError", "TypeCheckError", "RefinementError",
    "NoRepresentation", "ResourceLimit", "DanglingBubble", "EvalError", "TooLarge",
    "DecodeError",
]
