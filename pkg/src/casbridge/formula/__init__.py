"""LaTeX math subset: tokenizer, parser, AST, and the three renderers."""

from casbridge.formula.ast import (
    BigO,
    BigOp,
    Delimited,
    Ellipsis,
    FormulaNode,
    Fraction,
    Matrix,
    Number,
    Operator,
    Root,
    Row,
    Script,
    Spacing,
    Symbol,
    TextRun,
    dump_ast,
    validate_node,
)
from casbridge.formula.tokenizer import ParseError, Token, tokenize
from casbridge.formula.parser import CommandSpec, command_table, parse
from casbridge.formula.latex import to_canonical_latex
from casbridge.formula.mathml import to_mathml
from casbridge.formula.layout import BoxLayout, to_unicode

__all__ = [
    "BigO",
    "BigOp",
    "BoxLayout",
    "CommandSpec",
    "Delimited",
    "Ellipsis",
    "FormulaNode",
    "Fraction",
    "Matrix",
    "Number",
    "Operator",
    "ParseError",
    "Root",
    "Row",
    "Script",
    "Spacing",
    "Symbol",
    "TextRun",
    "Token",
    "command_table",
    "dump_ast",
    "parse",
    "to_canonical_latex",
    "to_mathml",
    "to_unicode",
    "tokenize",
    "validate_node",
]
