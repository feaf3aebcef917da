"""Presentation MathML emission.

Every node maps to exactly one element, so structural tests can walk the
tree and the XML in lockstep.  Only this element vocabulary is used:
math, mrow, mi, mn, mo, mfrac, msqrt, mroot, msub, msup, msubsup,
mtable, mtr, mtd, mtext, mspace, munderover.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

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

MATHML_NS = "http://www.w3.org/1998/Math/MathML"

_SPACE_WIDTHS = {"thin": "0.167em", "thick": "0.278em", "word": "0.333em", "neg": "0em"}

_BIGOP_GLYPHS = {"integral": "∫", "sum": "∑", "product": "∏"}

_ALIGN_NAMES = {"c": "center", "l": "left", "r": "right"}


def to_mathml(node: FormulaNode) -> str:
    """Serialize to a single <math> element in presentation markup."""
    return f'<math xmlns="{MATHML_NS}">' + _emit(node) + "</math>"


def _mi(text: str, variant: str = "") -> str:
    attr = f' mathvariant="{variant}"' if variant else ""
    return f"<mi{attr}>{escape(text)}</mi>"


def _mo(text: str) -> str:
    return f"<mo>{escape(text)}</mo>"


def _emit(node: FormulaNode) -> str:
    if isinstance(node, Symbol):
        if node.klass == "blackboard":
            return _mi(node.name, "double-struck")
        return _mi(node.name)
    if isinstance(node, Number):
        return f"<mn>{escape(node.text)}</mn>"
    if isinstance(node, Operator):
        return _mo(node.glyph)
    if isinstance(node, Row):
        return "<mrow>" + "".join(_emit(c) for c in node.children) + "</mrow>"
    if isinstance(node, Fraction):
        return "<mfrac>" + _emit(node.numerator) + _emit(node.denominator) + "</mfrac>"
    if isinstance(node, Root):
        if node.index is not None:
            return "<mroot>" + _emit(node.radicand) + _emit(node.index) + "</mroot>"
        return "<msqrt>" + _emit(node.radicand) + "</msqrt>"
    if isinstance(node, Script):
        base = _emit(node.base)
        if node.sub is not None and node.sup is not None:
            return "<msubsup>" + base + _emit(node.sub) + _emit(node.sup) + "</msubsup>"
        if node.sub is not None:
            return "<msub>" + base + _emit(node.sub) + "</msub>"
        return "<msup>" + base + _emit(node.sup) + "</msup>"
    if isinstance(node, Delimited):
        parts = ["<mrow>"]
        if node.left != "none":
            parts.append(_mo(node.left))
        parts.append(_emit(node.body))
        if node.right != "none":
            parts.append(_mo(node.right))
        parts.append("</mrow>")
        return "".join(parts)
    if isinstance(node, Matrix):
        align = " ".join(_ALIGN_NAMES[c] for c in node.colspec)
        rows = "".join(
            "<mtr>" + "".join("<mtd>" + _emit(cell) + "</mtd>" for cell in row) + "</mtr>"
            for row in node.rows
        )
        return f'<mtable columnalign="{align}">' + rows + "</mtable>"
    if isinstance(node, BigOp):
        op = _mo(_BIGOP_GLYPHS[node.op])
        wide = node.op in ("sum", "product")
        if node.lower is not None and node.upper is not None:
            tag = "munderover" if wide else "msubsup"
            op = f"<{tag}>" + op + _emit(node.lower) + _emit(node.upper) + f"</{tag}>"
        elif node.lower is not None:
            op = "<msub>" + op + _emit(node.lower) + "</msub>"
        elif node.upper is not None:
            op = "<msup>" + op + _emit(node.upper) + "</msup>"
        if node.body is not None:
            return "<mrow>" + op + _emit(node.body) + "</mrow>"
        return op
    if isinstance(node, TextRun):
        if node.style == "bold":
            return f'<mtext mathvariant="bold">{escape(node.text)}</mtext>'
        return f"<mtext>{escape(node.text)}</mtext>"
    if isinstance(node, Spacing):
        return f'<mspace width="{_SPACE_WIDTHS[node.width]}"/>'
    if isinstance(node, Ellipsis):
        return _mo("⋯")
    if isinstance(node, BigO):
        return "<mrow>" + _mi("O") + _mo("(") + _emit(node.arg) + _mo(")") + "</mrow>"
    raise TypeError(f"not a formula node: {node!r}")
