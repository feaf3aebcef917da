"""Canonical LaTeX emission.

The canonical form is the fixed point used by round-trip tests:
``parse(to_canonical_latex(tree)) == tree`` and emitting again yields the
identical string.  To guarantee that, the emitter is deliberately rigid:

- row items are joined with single spaces
- every script argument is braced, subscript before superscript
- script bases that would re-parse differently (Row, Script, BigOp, BigO)
  are wrapped in braces
- glyphs always map back to one command spelling (e.g. both arrow commands
  re-emit as ``\\to``)
"""

from __future__ import annotations

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
)
from casbridge.formula.parser import _GREEK, _OPERATOR_COMMANDS

_GREEK_BY_GLYPH = {glyph: name for name, glyph in _GREEK.items()}

# First command wins where two spell the same glyph (\to vs \rightarrow).
_COMMAND_BY_GLYPH: dict[str, str] = {}
for _name, (_glyph, _klass) in _OPERATOR_COMMANDS.items():
    _COMMAND_BY_GLYPH.setdefault(_glyph, _name)

_BIGOP_COMMANDS = {"integral": "int", "sum": "sum", "product": "prod"}

_STYLE_COMMANDS = {"plain": "text", "roman": "mathrm", "bold": "mathbf"}

_SPACING_COMMANDS = {"thin": "\\,", "thick": "\\;", "word": "\\ ", "neg": "\\!"}

# Bases whose emitted form would not re-parse as one atom.
_BRACED_BASES = (Row, Script, BigOp, BigO)


def to_canonical_latex(node: FormulaNode) -> str:
    return _emit(node)


def _delim(side: str, name: str) -> str:
    if name == "none":
        return f"\\{side}."
    if name in "{}":
        return f"\\{side}\\{name}"
    return f"\\{side}{name}"


def _text_escape(text: str) -> str:
    return text.replace("{", "\\{").replace("}", "\\}")


def _emit(node: FormulaNode) -> str:
    if isinstance(node, Symbol):
        if node.klass == "latin":
            return node.name
        if node.klass == "greek":
            return "\\" + _GREEK_BY_GLYPH[node.name]
        if node.klass == "blackboard":
            return "\\mathbb{" + node.name + "}"
        return "\\" + node.name
    if isinstance(node, Number):
        return node.text
    if isinstance(node, Operator):
        command = _COMMAND_BY_GLYPH.get(node.glyph)
        return "\\" + command if command else node.glyph
    if isinstance(node, Row):
        return " ".join(_emit(child) for child in node.children)
    if isinstance(node, Fraction):
        return "\\frac{" + _emit(node.numerator) + "}{" + _emit(node.denominator) + "}"
    if isinstance(node, Root):
        if node.index is not None:
            return "\\sqrt[" + _emit(node.index) + "]{" + _emit(node.radicand) + "}"
        return "\\sqrt{" + _emit(node.radicand) + "}"
    if isinstance(node, Script):
        base = _emit(node.base)
        if isinstance(node.base, _BRACED_BASES):
            base = "{" + base + "}"
        out = base
        if node.sub is not None:
            out += "_{" + _emit(node.sub) + "}"
        if node.sup is not None:
            out += "^{" + _emit(node.sup) + "}"
        return out
    if isinstance(node, Delimited):
        parts = [_delim("left", node.left)]
        body = _emit(node.body)
        if body:
            parts.append(body)
        parts.append(_delim("right", node.right))
        return " ".join(parts)
    if isinstance(node, Matrix):
        rows = " \\\\ ".join(
            " & ".join(_emit(cell) for cell in row) for row in node.rows
        )
        return "\\begin{array}{" + node.colspec + "} " + rows + " \\end{array}"
    if isinstance(node, BigOp):
        out = "\\" + _BIGOP_COMMANDS[node.op]
        if node.lower is not None:
            out += "_{" + _emit(node.lower) + "}"
        if node.upper is not None:
            out += "^{" + _emit(node.upper) + "}"
        if node.body is not None:
            out += " {" + _emit(node.body) + "}"
        return out
    if isinstance(node, TextRun):
        return "\\" + _STYLE_COMMANDS[node.style] + "{" + _text_escape(node.text) + "}"
    if isinstance(node, Spacing):
        return _SPACING_COMMANDS[node.width]
    if isinstance(node, Ellipsis):
        return "\\cdots"
    if isinstance(node, BigO):
        body = _emit(node.arg)
        if body:
            return "O \\left( " + body + " \\right)"
        return "O \\left( \\right)"
    raise TypeError(f"not a formula node: {node!r}")
