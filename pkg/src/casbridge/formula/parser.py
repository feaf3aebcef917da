"""Recursive-descent parser from LaTeX math tokens to FormulaNode trees.

Grammar notes, in the order the code applies them:

- a sequence is a run of items; sequences end at EOF or at a caller-owned
  stop token (``}``, ``\\right``, ``&``, ``\\\\``, ``\\end``)
- an item is an atom plus optional postfix scripts; ``_`` and ``^`` bind
  to the directly preceding atom, at most one of each
- big operators absorb their own ``_``/``^`` as limits, then an immediately
  following brace group as their body
- a bare brace group with no scripts attached is transparent: its contents
  are spliced into the surrounding sequence (so ``{a}+b`` equals ``a+b``),
  while ``{a+b}^2`` keeps the group as the script base
- the letter O followed directly by a parenthesized ``\\left(...\\right)``
  group merges into a BigO node (asymptotic-order notation)
- unrecognized commands downgrade to operator-name symbols and append a
  note to the caller's warning list; parsing never fails on them
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
    row_of,
    validate_node,
)
from casbridge.formula.tokenizer import ParseError, Token, tokenize

__all__ = ["ParseError", "parse", "command_table", "CommandSpec"]


@dataclass(frozen=True)
class CommandSpec:
    """How one backslash command is classified by the parser."""

    category: str  # symbol | operator | function | bigop | style | ellipsis | structure | ignore
    glyph: str = ""
    klass: str = ""
    style: str = ""
    op: str = ""


_GREEK = {
    "alpha": "α", "beta": "β", "gamma": "γ", "delta": "δ", "epsilon": "ε",
    "zeta": "ζ", "eta": "η", "theta": "θ", "iota": "ι", "kappa": "κ",
    "lambda": "λ", "mu": "μ", "nu": "ν", "xi": "ξ", "pi": "π", "rho": "ρ",
    "sigma": "σ", "tau": "τ", "upsilon": "υ", "phi": "φ", "chi": "χ",
    "psi": "ψ", "omega": "ω",
    "Gamma": "Γ", "Delta": "Δ", "Theta": "Θ", "Lambda": "Λ", "Xi": "Ξ",
    "Pi": "Π", "Sigma": "Σ", "Phi": "Φ", "Psi": "Ψ", "Omega": "Ω",
}

_OPERATOR_COMMANDS = {
    "wedge": ("∧", "binary"),
    "vee": ("∨", "binary"),
    "cdot": ("·", "binary"),
    "times": ("×", "binary"),
    "pm": ("±", "binary"),
    "partial": ("∂", "binary"),
    "neq": ("≠", "relation"),
    "leq": ("≤", "relation"),
    "geq": ("≥", "relation"),
    "equiv": ("≡", "relation"),
    "approx": ("≈", "relation"),
    "to": ("→", "arrow"),
    "rightarrow": ("→", "arrow"),
    "mapsto": ("↦", "arrow"),
}

_FUNCTIONS = (
    "sin", "cos", "tan", "cot", "sec", "csc",
    "arcsin", "arccos", "arctan", "sinh", "cosh", "tanh",
    "log", "ln", "exp", "lim", "det", "min", "max", "gcd",
)

_BIGOPS = {"int": "integral", "sum": "sum", "prod": "product"}

_STYLES = {"text": "plain", "mathrm": "roman", "mathbf": "bold"}

# Single characters that parse as Operator atoms, with their class.
_CHAR_OPERATORS = {
    "+": "binary", "-": "binary", "*": "binary", "/": "binary", "|": "binary",
    "=": "relation", "<": "relation", ">": "relation", ":": "relation",
    ",": "punctuation", ".": "punctuation", ";": "punctuation",
    "!": "punctuation", "?": "punctuation", "'": "punctuation",
}

# Raw unicode glyphs classify the same way their command spellings do, so
# pasted output and command input build identical trees.
_GREEK_GLYPHS = frozenset(_GREEK.values())
_GLYPH_OPERATORS: dict[str, str] = {"\u2212": "binary"}
for _name, (_glyph, _klass) in _OPERATOR_COMMANDS.items():
    _GLYPH_OPERATORS.setdefault(_glyph, _klass)


def _build_table() -> dict[str, CommandSpec]:
    table: dict[str, CommandSpec] = {}
    for name, glyph in _GREEK.items():
        table[name] = CommandSpec("symbol", glyph=glyph, klass="greek")
    for name, (glyph, klass) in _OPERATOR_COMMANDS.items():
        table[name] = CommandSpec("operator", glyph=glyph, klass=klass)
    for name in _FUNCTIONS:
        table[name] = CommandSpec("function")
    for name, op in _BIGOPS.items():
        table[name] = CommandSpec("bigop", op=op)
    for name, style in _STYLES.items():
        table[name] = CommandSpec("style", style=style)
    for name in ("cdots", "ldots", "dots"):
        table[name] = CommandSpec("ellipsis")
    for name in ("frac", "sqrt", "mathbb"):
        table[name] = CommandSpec("structure")
    table["displaystyle"] = CommandSpec("ignore")
    return table


_TABLE = _build_table()


def command_table() -> dict[str, CommandSpec]:
    """The closed command vocabulary; anything absent downgrades at parse."""
    return dict(_TABLE)


def parse(text: str, warnings: list[str] | None = None) -> FormulaNode:
    """Parse LaTeX math into a tree.  Raises ParseError with an offset.

    ``warnings`` (if given) collects notes about recoverable oddities such
    as unknown commands.
    """
    tokens = tokenize(text)
    parser = _Parser(tokens, text, warnings if warnings is not None else [])
    items, stop = parser.sequence(stop_kinds=frozenset())
    if stop is not None:
        raise ParseError(stop.offset, f"unexpected {stop.kind}", found=stop.value)
    node = row_of(items)
    validate_node(node)
    return node


_SEQ_STOPS = frozenset(("group_close", "right_delim", "ampersand", "row_break", "env_end"))


class _Parser:
    def __init__(self, tokens: list[Token], text: str, warnings: list[str]):
        self.tokens = tokens
        self.text = text
        self.warnings = warnings
        self.pos = 0

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def advance(self) -> Token | None:
        tok = self.peek()
        if tok is not None:
            self.pos += 1
        return tok

    def eof_offset(self) -> int:
        return len(self.text)

    # -- sequences -------------------------------------------------------

    def sequence(self, stop_kinds: frozenset) -> tuple[list[FormulaNode], Token | None]:
        """Parse items until EOF or a stop token; the stop is not consumed."""
        items: list[FormulaNode] = []
        while True:
            tok = self.peek()
            if tok is None:
                return items, None
            if tok.kind in _SEQ_STOPS:
                if tok.kind in stop_kinds:
                    return items, tok
                raise ParseError(tok.offset, f"unmatched {tok.kind}", found=tok.value)
            self.item(items)

    def item(self, items: list[FormulaNode]) -> None:
        tok = self.advance()
        assert tok is not None
        is_group = tok.kind == "group_open"
        node = self.atom(tok)

        if isinstance(node, BigOp):
            items.append(self.bigop_suffix(node))
            return

        sub, sup = self.scripts()
        if sub is not None or sup is not None:
            items.append(Script(node, sub, sup))
            return
        if isinstance(node, Row):
            # Unscripted bare groups (and multi-part style groups) are
            # transparent: splice children, empty groups vanish.
            items.extend(node.children)
            return
        if (
            isinstance(node, Delimited)
            and node.left == "(" and node.right == ")"
            and items and items[-1] == Symbol("O", "latin")
        ):
            items[-1] = BigO(node.body)
            return
        items.append(node)

    def scripts(self) -> tuple[FormulaNode | None, FormulaNode | None]:
        sub: FormulaNode | None = None
        sup: FormulaNode | None = None
        while True:
            tok = self.peek()
            if tok is None or tok.kind not in ("subscript", "superscript"):
                return sub, sup
            self.advance()
            if tok.kind == "subscript":
                if sub is not None:
                    raise ParseError(tok.offset, "double subscript")
                sub = self.argument("subscript")
            else:
                if sup is not None:
                    raise ParseError(tok.offset, "double superscript")
                sup = self.argument("superscript")

    def bigop_suffix(self, node: BigOp) -> BigOp:
        lower, upper = self.scripts()
        body: FormulaNode | None = None
        nxt = self.peek()
        if nxt is not None and nxt.kind == "group_open":
            self.advance()
            body = self.group_body(nxt)
        return BigOp(node.op, lower, upper, body)

    # -- atoms -----------------------------------------------------------

    def atom(self, tok: Token) -> FormulaNode:
        kind = tok.kind
        if kind == "symbol":
            return self.char_atom(tok)
        if kind == "digit_run":
            return Number(tok.value)
        if kind == "group_open":
            return self.group_body(tok)
        if kind == "command":
            return self.command_atom(tok)
        if kind == "left_delim":
            return self.delimited(tok)
        if kind == "env_begin":
            return self.environment(tok)
        if kind == "spacing":
            return Spacing(tok.value)
        if kind in ("superscript", "subscript"):
            raise ParseError(tok.offset, f"{kind} with nothing to attach to")
        raise ParseError(tok.offset, f"unexpected {kind}", found=tok.value)

    def char_atom(self, tok: Token) -> FormulaNode:
        c = tok.value
        if c in _GREEK_GLYPHS:
            return Symbol(c, "greek")
        if c.isalpha():
            return Symbol(c, "latin")
        if c in _CHAR_OPERATORS:
            return Operator(c, _CHAR_OPERATORS[c])
        if c in _GLYPH_OPERATORS:
            return Operator(c, _GLYPH_OPERATORS[c])
        return Operator(c, "punctuation")

    def group_body(self, open_tok: Token) -> FormulaNode:
        items, stop = self.sequence(stop_kinds=frozenset(("group_close",)))
        if stop is None:
            raise ParseError(open_tok.offset, "unterminated group")
        self.advance()
        return row_of(items) if items else Row()

    def argument(self, purpose: str) -> FormulaNode:
        tok = self.advance()
        if tok is None:
            raise ParseError(self.eof_offset(), f"missing {purpose} argument")
        if tok.kind == "group_open":
            return self.group_body(tok)
        return self.atom(tok)

    def command_atom(self, tok: Token) -> FormulaNode:
        name = tok.value
        spec = _TABLE.get(name)
        if spec is None:
            self.warnings.append(
                f"unknown command \\{name} at offset {tok.offset}; kept as operator name"
            )
            return Symbol(name, "operator-name")
        if spec.category == "symbol":
            return Symbol(spec.glyph, spec.klass)
        if spec.category == "operator":
            return Operator(spec.glyph, spec.klass)
        if spec.category == "function":
            return Symbol(name, "operator-name")
        if spec.category == "ellipsis":
            return Ellipsis()
        if spec.category == "bigop":
            return BigOp(spec.op)
        if spec.category == "style":
            return self.style_atom(spec.style, tok)
        if spec.category == "ignore":
            nxt = self.peek()
            if nxt is None:
                raise ParseError(tok.offset, f"\\{name} with nothing following")
            self.advance()
            return self.atom(nxt)
        if name == "frac":
            numerator = self.argument("numerator")
            denominator = self.argument("denominator")
            return Fraction(numerator, denominator)
        if name == "sqrt":
            return self.root(tok)
        if name == "mathbb":
            arg = self.argument("blackboard letter")
            if isinstance(arg, Symbol) and arg.klass == "latin" and len(arg.name) == 1:
                return Symbol(arg.name, "blackboard")
            raise ParseError(tok.offset, "\\mathbb expects a single letter")
        raise ParseError(tok.offset, f"unhandled command \\{name}")

    def root(self, tok: Token) -> FormulaNode:
        index: FormulaNode | None = None
        nxt = self.peek()
        if nxt is not None and nxt.kind == "symbol" and nxt.value == "[":
            self.advance()
            items: list[FormulaNode] = []
            while True:
                t = self.peek()
                if t is None:
                    raise ParseError(nxt.offset, "unterminated root index")
                if t.kind == "symbol" and t.value == "]":
                    self.advance()
                    break
                self.item(items)
            index = row_of(items) if items else Row()
        radicand = self.argument("radicand")
        return Root(radicand, index)

    def delimited(self, open_tok: Token) -> FormulaNode:
        items, stop = self.sequence(stop_kinds=frozenset(("right_delim",)))
        if stop is None:
            raise ParseError(open_tok.offset, "unbalanced \\left")
        self.advance()
        body = row_of(items) if items else Row()
        return Delimited(open_tok.value, stop.value, body)

    def environment(self, env_tok: Token) -> FormulaNode:
        if env_tok.value != "array":
            raise ParseError(env_tok.offset, f"unsupported environment {env_tok.value!r}")
        colspec = env_tok.colspec
        if not colspec or any(c not in "clr" for c in colspec):
            raise ParseError(env_tok.offset, f"bad column spec {colspec!r}")
        stops = frozenset(("ampersand", "row_break", "env_end"))
        rows: list[tuple[FormulaNode, ...]] = []
        cells: list[FormulaNode] = []
        while True:
            items, stop = self.sequence(stop_kinds=stops)
            if stop is None:
                raise ParseError(env_tok.offset, "unterminated array")
            cell = row_of(items) if items else Row()
            self.advance()
            if stop.kind == "ampersand":
                cells.append(cell)
            elif stop.kind == "row_break":
                cells.append(cell)
                rows.append(tuple(cells))
                cells = []
            else:
                if stop.value != "array":
                    raise ParseError(stop.offset, f"\\end{{{stop.value}}} closes array")
                # A trailing \\ before \end leaves one empty dangling row;
                # drop it so emitted and source forms parse identically.
                if items or cells:
                    cells.append(cell)
                    rows.append(tuple(cells))
                break
        if not rows:
            raise ParseError(env_tok.offset, "array with no rows")
        for row in rows:
            if len(row) != len(colspec):
                raise ParseError(
                    env_tok.offset,
                    f"array row has {len(row)} cells, column spec wants {len(colspec)}",
                )
        return Matrix(colspec, tuple(rows))

    # -- text-style groups -------------------------------------------------

    def style_atom(self, style: str, cmd_tok: Token) -> FormulaNode:
        nxt = self.peek()
        if nxt is not None and nxt.kind == "group_open":
            self.advance()
            return self.text_group(style, nxt)
        # Style applied to a single following atom, e.g. \mathrm x.
        arg = self.argument("styled text")
        if isinstance(arg, Symbol) and arg.klass == "latin":
            return TextRun(arg.name, style)
        if isinstance(arg, Number):
            return TextRun(arg.text, style)
        raise ParseError(cmd_tok.offset, "styled argument must be literal text")

    def text_group(self, style: str, open_tok: Token) -> FormulaNode:
        """Parse a text-mode group into TextRun/Spacing/nested-style nodes."""
        items: list[FormulaNode] = []
        buf: list[str] = []

        def flush() -> None:
            if buf:
                items.append(TextRun("".join(buf), style))
                buf.clear()

        while True:
            tok = self.advance()
            if tok is None:
                raise ParseError(open_tok.offset, "unterminated group")
            if tok.kind == "group_close":
                flush()
                break
            if tok.kind in ("symbol", "digit_run"):
                buf.append(tok.value)
            elif tok.kind == "spacing":
                flush()
                items.append(Spacing(tok.value))
            elif tok.kind == "group_open":
                flush()
                items.append(self.text_group(style, tok))
            elif tok.kind == "command":
                spec = _TABLE.get(tok.value)
                if spec is not None and spec.category == "style":
                    flush()
                    items.append(self.style_atom(spec.style, tok))
                elif spec is not None and spec.category == "symbol":
                    flush()
                    items.append(Symbol(spec.glyph, spec.klass))
                elif spec is not None and spec.category == "operator":
                    flush()
                    items.append(Operator(spec.glyph, spec.klass))
                elif spec is not None and spec.category == "ellipsis":
                    flush()
                    items.append(Ellipsis())
                elif tok.value in ("{", "}"):
                    buf.append(tok.value)
                else:
                    flush()
                    self.warnings.append(
                        f"unknown command \\{tok.value} at offset {tok.offset};"
                        " kept as operator name"
                    )
                    items.append(Symbol(tok.value, "operator-name"))
            else:
                raise ParseError(tok.offset, f"{tok.kind} not allowed in text")
        if not items:
            return TextRun("", style)
        flat: list[FormulaNode] = []
        for node in items:
            if isinstance(node, Row):
                flat.extend(node.children)
            else:
                flat.append(node)
        return row_of(flat)
