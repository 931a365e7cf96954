"""The SNP language: syntax tree, parser, checks, inlining and interpreter."""
from .ast import (AddConst, Assign, BinaryOp, Call, Const, ForLoop, If,
                  MulConst, Program, Return, Statement, UnaryCmp, Var, VarDecl,
                  walk)
from .inline import InlineError, inline_composite
from .interp import (BoundProfile, ExecResult, SNPRuntimeError,
                     SweepCapExceeded, bound_profile, execute, input_grid,
                     interpret)
from .parser import SNPSyntaxError, parse, parse_file
from .printer import render
from .validate import Diagnostic, SNPValidationError, check, errors, validate

__all__ = [
    "AddConst", "Assign", "BinaryOp", "Call", "Const", "ForLoop", "If",
    "MulConst", "Program", "Return", "Statement", "UnaryCmp", "Var", "VarDecl",
    "walk", "InlineError", "inline_composite", "BoundProfile", "ExecResult",
    "SNPRuntimeError", "SweepCapExceeded", "bound_profile", "execute",
    "input_grid", "interpret", "SNPSyntaxError", "parse", "parse_file",
    "render", "Diagnostic", "SNPValidationError", "check", "errors", "validate",
]
