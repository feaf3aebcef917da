"""Two-dimensional plain-text rendering of formula trees.

A BoxLayout is a rectangular grid of equal-width lines plus a baseline row
index.  Composition rules (frozen by the golden tests):

- row items are separated by one space, except: no space around explicit
  Spacing nodes, before punctuation operators, or between a symbol-like
  item and a following parenthesized group
- fraction rule width is the wider of numerator and denominator
- matrix columns are two spaces apart; matrix rows have one blank line
  between them; the matrix baseline is the middle row
- the radical bar adds one row above the radicand

Two glyph modes exist: full Unicode (box-drawing brackets, real glyphs)
and pure ASCII.
"""

from __future__ import annotations

from dataclasses import dataclass

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
from casbridge.formula.parser import _GREEK


@dataclass(frozen=True)
class BoxLayout:
    lines: tuple[str, ...]
    baseline: int

    @property
    def width(self) -> int:
        return len(self.lines[0]) if self.lines else 0

    @property
    def height(self) -> int:
        return len(self.lines)

    @property
    def ascent(self) -> int:
        return self.baseline

    @property
    def descent(self) -> int:
        return len(self.lines) - self.baseline - 1

    def validate(self) -> None:
        if not self.lines:
            raise ValueError("box with no lines")
        if not 0 <= self.baseline < len(self.lines):
            raise ValueError(f"baseline {self.baseline} outside {len(self.lines)} lines")
        widths = {len(line) for line in self.lines}
        if len(widths) != 1:
            raise ValueError(f"ragged box: line widths {sorted(widths)}")

    def text(self) -> str:
        return "\n".join(self.lines)


_GREEK_NAMES = {glyph: name for name, glyph in _GREEK.items()}

_BLACKBOARD = {
    "C": "ℂ", "H": "ℍ", "N": "ℕ", "P": "ℙ", "Q": "ℚ", "R": "ℝ", "Z": "ℤ",
}

_OP_ASCII = {
    "∧": "/\\", "∨": "\\/", "·": "*", "×": "x", "±": "+-", "∂": "d",
    "≠": "!=", "≤": "<=", "≥": ">=", "≡": "==", "≈": "~=",
    "→": "->", "↦": "|->", "−": "-",
}

_SPACING_COLS = {"thin": 1, "thick": 2, "word": 1, "neg": 0}

# (top, middle, bottom) rows of a tall delimiter column; braces get a
# dedicated waist row at mid-height.
_TALL_UNI = {
    "(": ("⎛", "⎜", "⎝"), ")": ("⎞", "⎟", "⎠"),
    "[": ("⎡", "⎢", "⎣"), "]": ("⎤", "⎥", "⎦"),
    "{": ("⎧", "⎪", "⎩"), "}": ("⎫", "⎪", "⎭"),
    "|": ("⎪", "⎪", "⎪"),
}
_BRACE_WAIST = {"{": "⎨", "}": "⎬"}


def to_unicode(node: FormulaNode, ascii_mode: bool = False) -> BoxLayout:
    box = _render(node, ascii_mode)
    box.validate()
    return box


def _line_box(text: str) -> BoxLayout:
    return BoxLayout((text,), 0)


def _pad(line: str, width: int, align: str = "c") -> str:
    extra = width - len(line)
    if align == "l":
        return line + " " * extra
    if align == "r":
        return " " * extra + line
    left = extra // 2
    return " " * left + line + " " * (extra - left)


def _pad_box(box: BoxLayout, width: int, align: str = "c") -> BoxLayout:
    return BoxLayout(tuple(_pad(l, width, align) for l in box.lines), box.baseline)


def _hcat(parts: list[tuple[BoxLayout, int]], gaps: list[int]) -> BoxLayout:
    """Concatenate horizontally; dy shifts a box's baseline below the result's."""
    ascent = max(box.ascent - dy for box, dy in parts)
    descent = max(box.descent + dy for box, dy in parts)
    height = ascent + descent + 1
    lines = []
    for r in range(height):
        rel = r - ascent
        pieces = []
        for k, (box, dy) in enumerate(parts):
            if k:
                pieces.append(" " * gaps[k - 1])
            i = rel - dy + box.baseline
            pieces.append(box.lines[i] if 0 <= i < box.height else " " * box.width)
        lines.append("".join(pieces))
    return BoxLayout(tuple(lines), ascent)


def _vstack_center(tops: list[str], width: int) -> list[str]:
    return [_pad(line, width) for line in tops]


def _gap(prev: FormulaNode, cur: FormulaNode) -> int:
    if isinstance(prev, Spacing) or isinstance(cur, Spacing):
        return 0
    if isinstance(cur, Operator) and cur.klass == "punctuation":
        return 0
    if isinstance(prev, Operator) and prev.glyph in "([":
        return 0
    if isinstance(cur, (Delimited, BigO)) and isinstance(
        prev, (Symbol, Number, Script, Delimited, BigO)
    ):
        return 0
    return 1


def _delim_column(name: str, height: int, ascii_mode: bool) -> BoxLayout | None:
    if name == "none":
        return None
    if ascii_mode or height == 1:
        return BoxLayout((name,) * height, 0)
    top, mid, bot = _TALL_UNI[name]
    if height == 2:
        rows = [top, bot]
    else:
        rows = [top] + [mid] * (height - 2) + [bot]
        if name in _BRACE_WAIST:
            rows[(height - 1) // 2] = _BRACE_WAIST[name]
    return BoxLayout(tuple(rows), 0)


def _render(node: FormulaNode, a: bool) -> BoxLayout:
    if isinstance(node, Symbol):
        return _line_box(_symbol_text(node, a))
    if isinstance(node, Number):
        return _line_box(node.text)
    if isinstance(node, Operator):
        if a:
            return _line_box(_OP_ASCII.get(node.glyph, node.glyph))
        return _line_box("−" if node.glyph == "-" else node.glyph)
    if isinstance(node, TextRun):
        return _line_box(node.text)
    if isinstance(node, Spacing):
        return _line_box(" " * _SPACING_COLS[node.width])
    if isinstance(node, Ellipsis):
        return _line_box("..." if a else "⋯")
    if isinstance(node, Row):
        return _render_row(node, a)
    if isinstance(node, Fraction):
        return _render_fraction(node, a)
    if isinstance(node, Root):
        return _render_root(node, a)
    if isinstance(node, Script):
        return _render_script(node, a)
    if isinstance(node, Delimited):
        return _render_delimited(node.left, node.right, node.body, a)
    if isinstance(node, Matrix):
        return _render_matrix(node, a)
    if isinstance(node, BigOp):
        return _render_bigop(node, a)
    if isinstance(node, BigO):
        inner = _render_delimited("(", ")", node.arg, a)
        return _hcat([(_line_box("O"), 0), (inner, 0)], [0])
    raise TypeError(f"not a formula node: {node!r}")


def _symbol_text(node: Symbol, a: bool) -> str:
    if node.klass == "greek":
        return _GREEK_NAMES[node.name] if a else node.name
    if node.klass == "blackboard":
        return node.name if a else _BLACKBOARD.get(node.name, node.name)
    return node.name


def _render_row(node: Row, a: bool) -> BoxLayout:
    if not node.children:
        return BoxLayout(("",), 0)
    boxes = [_render(c, a) for c in node.children]
    gaps = [
        _gap(node.children[i], node.children[i + 1])
        for i in range(len(node.children) - 1)
    ]
    return _hcat([(b, 0) for b in boxes], gaps)


def _render_fraction(node: Fraction, a: bool) -> BoxLayout:
    num = _render(node.numerator, a)
    den = _render(node.denominator, a)
    width = max(num.width, den.width)
    rule = ("-" if a else "─") * width
    lines = (
        _vstack_center(list(num.lines), width)
        + [rule]
        + _vstack_center(list(den.lines), width)
    )
    return BoxLayout(tuple(lines), num.height)


def _render_root(node: Root, a: bool) -> BoxLayout:
    rad = _render(node.radicand, a)
    glyph = "\\/" if a else "√"
    bar = "_" if a else "‾"
    gw = len(glyph)
    lines = [" " * gw + bar * rad.width]
    for i, line in enumerate(rad.lines):
        prefix = glyph if i == rad.baseline else " " * gw
        lines.append(prefix + line)
    box = BoxLayout(tuple(lines), rad.baseline + 1)
    if node.index is None:
        return box
    idx = _render(node.index, a)
    # Index hangs off the top-left, its bottom row level with the bar.
    dy = -box.baseline - idx.descent
    return _hcat([(idx, dy), (box, 0)], [0])


def _render_script(node: Script, a: bool) -> BoxLayout:
    base = _render(node.base, a)
    sup = _render(node.sup, a) if node.sup is not None else None
    sub = _render(node.sub, a) if node.sub is not None else None
    col_width = max(b.width for b in (sup, sub) if b is not None)
    col_lines: list[str] = []
    if sup is not None:
        col_lines.extend(_pad(l, col_width, "l") for l in sup.lines)
    sup_height = sup.height if sup is not None else 0
    col_lines.extend([" " * col_width] * base.height)
    if sub is not None:
        col_lines.extend(_pad(l, col_width, "l") for l in sub.lines)
    col = BoxLayout(tuple(col_lines), sup_height + base.ascent)
    return _hcat([(base, 0), (col, 0)], [0])


def _render_delimited(left: str, right: str, body: FormulaNode, a: bool) -> BoxLayout:
    inner = _render(body, a)
    parts: list[tuple[BoxLayout, int]] = []
    lcol = _delim_column(left, inner.height, a)
    if lcol is not None:
        parts.append((BoxLayout(lcol.lines, inner.baseline), 0))
    parts.append((inner, 0))
    rcol = _delim_column(right, inner.height, a)
    if rcol is not None:
        parts.append((BoxLayout(rcol.lines, inner.baseline), 0))
    if len(parts) == 1:
        return inner
    return _hcat(parts, [0] * (len(parts) - 1))


def _render_matrix(node: Matrix, a: bool) -> BoxLayout:
    grid = [[_render(cell, a) for cell in row] for row in node.rows]
    col_widths = [
        max(grid[r][c].width for r in range(len(grid)))
        for c in range(len(node.colspec))
    ]
    row_boxes = []
    for cells in grid:
        padded = [
            _pad_box(cell, col_widths[c], node.colspec[c])
            for c, cell in enumerate(cells)
        ]
        row_boxes.append(_hcat([(p, 0) for p in padded], [2] * (len(padded) - 1)))
    width = row_boxes[0].width
    lines: list[str] = []
    for k, rb in enumerate(row_boxes):
        if k:
            lines.append(" " * width)
        lines.extend(rb.lines)
    return BoxLayout(tuple(lines), (len(lines) - 1) // 2)


def _bigop_column(op: str, a: bool) -> BoxLayout:
    if op == "integral":
        if a:
            return BoxLayout(("/", "|", "/"), 1)
        return BoxLayout(("⌠", "⌡"), 1)
    if op == "sum":
        return _line_box("S" if a else "∑")
    return _line_box("P" if a else "∏")


def _render_bigop(node: BigOp, a: bool) -> BoxLayout:
    col = _bigop_column(node.op, a)
    upper = _render(node.upper, a) if node.upper is not None else None
    lower = _render(node.lower, a) if node.lower is not None else None
    if upper is None and lower is None:
        box = col
    else:
        width = max(
            col.width,
            upper.width if upper is not None else 0,
            lower.width if lower is not None else 0,
        )
        lines: list[str] = []
        if upper is not None:
            lines.extend(_pad(l, width) for l in upper.lines)
        baseline = len(lines) + col.baseline
        lines.extend(_pad(l, width) for l in col.lines)
        if lower is not None:
            lines.extend(_pad(l, width) for l in lower.lines)
        box = BoxLayout(tuple(lines), baseline)
    if node.body is None:
        return box
    body = _render(node.body, a)
    return _hcat([(box, 0), (body, 0)], [1])
