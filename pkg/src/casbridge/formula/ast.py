"""Immutable AST for the LaTeX math subset emitted by CAS backends.

Every node is a frozen dataclass, so structural equality and hashing come
for free; parse/render round-trip tests compare whole trees with ``==``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

# Classes a Symbol may belong to.  "operator-name" covers upright function
# names such as sin/log and any unrecognized command that was downgraded.
SYMBOL_CLASSES = ("latin", "greek", "blackboard", "operator-name")

# Classes an Operator may belong to; they matter for renderer spacing and
# for the reverse glyph-to-command mapping.
OPERATOR_CLASSES = ("binary", "relation", "arrow", "punctuation")

# Recognized delimiter names for Delimited.  "none" means an invisible
# bracket on that side.
DELIMITERS = ("(", ")", "[", "]", "{", "}", "|", "none")

TEXT_STYLES = ("plain", "roman", "bold")

SPACING_WIDTHS = ("thin", "thick", "word", "neg")

BIG_OPERATORS = ("integral", "sum", "product")


@dataclass(frozen=True)
class Symbol:
    name: str
    klass: str = "latin"


@dataclass(frozen=True)
class Number:
    text: str


@dataclass(frozen=True)
class Operator:
    glyph: str
    klass: str = "binary"


@dataclass(frozen=True)
class Row:
    children: tuple["FormulaNode", ...] = ()


@dataclass(frozen=True)
class Fraction:
    numerator: "FormulaNode"
    denominator: "FormulaNode"


@dataclass(frozen=True)
class Root:
    radicand: "FormulaNode"
    index: "FormulaNode | None" = None


@dataclass(frozen=True)
class Script:
    base: "FormulaNode"
    sub: "FormulaNode | None" = None
    sup: "FormulaNode | None" = None


@dataclass(frozen=True)
class Delimited:
    left: str
    right: str
    body: "FormulaNode" = field(default_factory=Row)


@dataclass(frozen=True)
class Matrix:
    colspec: str
    rows: tuple[tuple["FormulaNode", ...], ...]


@dataclass(frozen=True)
class BigOp:
    op: str
    lower: "FormulaNode | None" = None
    upper: "FormulaNode | None" = None
    body: "FormulaNode | None" = None


@dataclass(frozen=True)
class TextRun:
    text: str
    style: str = "plain"


@dataclass(frozen=True)
class Spacing:
    width: str


@dataclass(frozen=True)
class Ellipsis:
    pass


@dataclass(frozen=True)
class BigO:
    arg: "FormulaNode"


FormulaNode = Union[
    Symbol,
    Number,
    Operator,
    Row,
    Fraction,
    Root,
    Script,
    Delimited,
    Matrix,
    BigO,
    BigOp,
    TextRun,
    Spacing,
    Ellipsis,
]


class InvalidNode(ValueError):
    """A structurally malformed tree (bad class tag, nested Row, ...)."""


def _children(node: FormulaNode) -> list[FormulaNode]:
    if isinstance(node, Row):
        return list(node.children)
    if isinstance(node, Fraction):
        return [node.numerator, node.denominator]
    if isinstance(node, Root):
        return [node.radicand] + ([node.index] if node.index is not None else [])
    if isinstance(node, Script):
        return [node.base] + [s for s in (node.sub, node.sup) if s is not None]
    if isinstance(node, Delimited):
        return [node.body]
    if isinstance(node, Matrix):
        return [cell for row in node.rows for cell in row]
    if isinstance(node, BigOp):
        return [s for s in (node.lower, node.upper, node.body) if s is not None]
    if isinstance(node, BigO):
        return [node.arg]
    return []


def validate_node(node: FormulaNode) -> None:
    """Raise InvalidNode if the tree violates a structural rule.

    Rules enforced:
    - every class/style/width tag comes from its closed vocabulary
    - a Row never directly contains another Row
    - a Script carries at least one of sub/sup
    - Matrix rows are nonempty and each row has len(colspec) cells
    - Delimited sides are known delimiter names
    """
    if isinstance(node, Symbol):
        if node.klass not in SYMBOL_CLASSES:
            raise InvalidNode(f"bad symbol class {node.klass!r}")
        if not node.name:
            raise InvalidNode("empty symbol name")
    elif isinstance(node, Operator):
        if node.klass not in OPERATOR_CLASSES:
            raise InvalidNode(f"bad operator class {node.klass!r}")
    elif isinstance(node, Number):
        if not node.text:
            raise InvalidNode("empty number")
    elif isinstance(node, Row):
        for child in node.children:
            if isinstance(child, Row):
                raise InvalidNode("Row directly inside Row")
    elif isinstance(node, Script):
        if node.sub is None and node.sup is None:
            raise InvalidNode("Script with neither sub nor sup")
    elif isinstance(node, Delimited):
        for side in (node.left, node.right):
            if side not in DELIMITERS:
                raise InvalidNode(f"bad delimiter {side!r}")
    elif isinstance(node, Matrix):
        if not node.rows:
            raise InvalidNode("Matrix with no rows")
        if not node.colspec or any(c not in "clr" for c in node.colspec):
            raise InvalidNode(f"bad column spec {node.colspec!r}")
        for row in node.rows:
            if len(row) != len(node.colspec):
                raise InvalidNode(
                    f"row has {len(row)} cells, column spec wants {len(node.colspec)}"
                )
    elif isinstance(node, BigOp):
        if node.op not in BIG_OPERATORS:
            raise InvalidNode(f"bad big operator {node.op!r}")
    elif isinstance(node, TextRun):
        if node.style not in TEXT_STYLES:
            raise InvalidNode(f"bad text style {node.style!r}")
    elif isinstance(node, Spacing):
        if node.width not in SPACING_WIDTHS:
            raise InvalidNode(f"bad spacing width {node.width!r}")
    for child in _children(node):
        validate_node(child)


def row_of(items: list[FormulaNode] | tuple[FormulaNode, ...]) -> FormulaNode:
    """Normalize a parsed sequence: unwrap singletons, else wrap in a Row."""
    items = tuple(items)
    if len(items) == 1:
        return items[0]
    return Row(items)


def dump_ast(node: FormulaNode, indent: int = 0) -> str:
    """Human-oriented tree dump used by the ``parse`` CLI subcommand."""
    pad = "  " * indent
    if isinstance(node, Row):
        inner = "\n".join(dump_ast(c, indent + 1) for c in node.children)
        return f"{pad}Row\n{inner}" if inner else f"{pad}Row (empty)"
    if isinstance(node, Fraction):
        return (
            f"{pad}Fraction\n{dump_ast(node.numerator, indent + 1)}\n"
            f"{dump_ast(node.denominator, indent + 1)}"
        )
    if isinstance(node, Root):
        out = f"{pad}Root\n{dump_ast(node.radicand, indent + 1)}"
        if node.index is not None:
            out += f"\n{pad}  index:\n{dump_ast(node.index, indent + 2)}"
        return out
    if isinstance(node, Script):
        out = f"{pad}Script\n{dump_ast(node.base, indent + 1)}"
        if node.sub is not None:
            out += f"\n{pad}  sub:\n{dump_ast(node.sub, indent + 2)}"
        if node.sup is not None:
            out += f"\n{pad}  sup:\n{dump_ast(node.sup, indent + 2)}"
        return out
    if isinstance(node, Delimited):
        return (
            f"{pad}Delimited {node.left!r} {node.right!r}\n"
            f"{dump_ast(node.body, indent + 1)}"
        )
    if isinstance(node, Matrix):
        lines = [f"{pad}Matrix colspec={node.colspec!r}"]
        for r, row in enumerate(node.rows):
            lines.append(f"{pad}  row {r}:")
            lines.extend(dump_ast(cell, indent + 2) for cell in row)
        return "\n".join(lines)
    if isinstance(node, BigOp):
        lines = [f"{pad}BigOp {node.op}"]
        for tag, sub in (("lower", node.lower), ("upper", node.upper), ("body", node.body)):
            if sub is not None:
                lines.append(f"{pad}  {tag}:")
                lines.append(dump_ast(sub, indent + 2))
        return "\n".join(lines)
    if isinstance(node, BigO):
        return f"{pad}BigO\n{dump_ast(node.arg, indent + 1)}"
    return f"{pad}{node!r}"
