"""Tokenizer for the LaTeX math subset.

Produces a flat token list with source offsets; the parser builds the tree.
Dollar signs are ignored wherever they appear, so framed payloads like
``$x^2$`` tokenize the same as bare ``x^2``.

Inside the argument group of a text-style command (``\\text``, ``\\mathrm``,
``\\mathbf``) the tokenizer switches to text mode: spaces become ordinary
symbol tokens and ``^ _ &`` lose their special meaning, while backslash
commands still lex normally so nested styles and spacing work.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

TOKEN_KINDS = (
    "command",
    "symbol",
    "digit_run",
    "group_open",
    "group_close",
    "superscript",
    "subscript",
    "ampersand",
    "row_break",
    "left_delim",
    "right_delim",
    "env_begin",
    "env_end",
    "spacing",
)

STYLE_COMMANDS = ("text", "mathrm", "mathbf")

_SPACING_CHARS = {",": "thin", ";": "thick", " ": "word", "!": "neg"}

_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?")
_LETTERS_RE = re.compile(r"[A-Za-z]+")


class ParseError(ValueError):
    """Tokenize or parse failure, anchored to a source offset."""

    def __init__(
        self,
        offset: int,
        message: str,
        expected: tuple[str, ...] = (),
        found: str = "",
    ):
        self.offset = offset
        self.message = message
        self.expected = expected
        self.found = found
        detail = message
        if expected:
            detail += f" (expected {' or '.join(expected)}"
            detail += f", found {found!r})" if found else ")"
        super().__init__(f"at offset {offset}: {detail}")


@dataclass(frozen=True)
class Token:
    kind: str
    offset: int
    value: str = ""
    # env_begin only: the column spec of an array environment
    colspec: str = field(default="", compare=False)


def tokenize(text: str) -> list[Token]:
    return _Tokenizer(text).run()


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.i = 0
        self.out: list[Token] = []
        # Brace depths at which text mode was entered; nonempty == text mode.
        self.text_depths: list[int] = []
        self.depth = 0
        # Set after a style command so the next group_open enters text mode.
        self.pending_text = False

    def error(self, offset: int, message: str, expected=(), found="") -> ParseError:
        return ParseError(offset, message, tuple(expected), found)

    def emit(self, kind: str, offset: int, value: str = "", colspec: str = "") -> None:
        self.out.append(Token(kind, offset, value, colspec))

    def run(self) -> list[Token]:
        text, n = self.text, len(self.text)
        while self.i < n:
            c = text[self.i]
            in_text = bool(self.text_depths)
            if c == "$":
                self.i += 1
            elif c == "\\":
                self.command()
            elif c == "{":
                self.emit("group_open", self.i)
                self.depth += 1
                if self.pending_text:
                    self.text_depths.append(self.depth)
                self.pending_text = False
                self.i += 1
            elif c == "}":
                self.emit("group_close", self.i)
                if self.text_depths and self.text_depths[-1] == self.depth:
                    self.text_depths.pop()
                self.depth -= 1
                self.i += 1
            elif in_text:
                # Literal text: every character counts, including spaces.
                self.emit("symbol", self.i, c)
                self.i += 1
            elif c in " \t\n":
                self.i += 1
            elif c == "^":
                self.emit("superscript", self.i)
                self.i += 1
            elif c == "_":
                self.emit("subscript", self.i)
                self.i += 1
            elif c == "&":
                self.emit("ampersand", self.i)
                self.i += 1
            elif c.isdigit():
                m = _NUMBER_RE.match(text, self.i)
                assert m is not None
                self.emit("digit_run", self.i, m.group())
                self.i = m.end()
            else:
                self.emit("symbol", self.i, c)
                self.i += 1
            # A style command arms text mode for its upcoming group; only
            # whitespace (and the group_open itself) may sit in between.
            if c not in "\\{" and not c.isspace():
                self.pending_text = False
        return self.out

    def command(self) -> None:
        start = self.i
        text, n = self.text, len(self.text)
        self.pending_text = False
        self.i += 1
        if self.i >= n:
            raise self.error(start, "dangling backslash")
        c = text[self.i]
        if not c.isalpha():
            self.i += 1
            if c == "\\":
                self.emit("row_break", start)
            elif c in _SPACING_CHARS:
                self.emit("spacing", start, _SPACING_CHARS[c])
            else:
                # Escaped single character such as \{ or \|.
                self.emit("command", start, c)
            return
        m = _LETTERS_RE.match(text, self.i)
        assert m is not None
        name = m.group()
        self.i = m.end()
        if name in ("left", "right"):
            self.delimiter(start, name)
        elif name == "begin":
            self.environment_begin(start)
        elif name == "end":
            env = self.braced_word(start, "environment name")
            self.emit("env_end", start, env)
        else:
            if name in STYLE_COMMANDS:
                self.pending_text = True
            self.emit("command", start, name)

    def skip_space(self) -> None:
        while self.i < len(self.text) and self.text[self.i] in " \t\n":
            self.i += 1

    def delimiter(self, start: int, side: str) -> None:
        self.skip_space()
        text, n = self.text, len(self.text)
        if self.i >= n:
            raise self.error(start, f"\\{side} without a delimiter")
        c = text[self.i]
        if c in "()[]|":
            value = c
            self.i += 1
        elif c == ".":
            value = "none"
            self.i += 1
        elif c == "\\" and self.i + 1 < n and text[self.i + 1] in "{}|":
            value = text[self.i + 1]
            self.i += 2
        else:
            raise self.error(
                self.i, "bad delimiter", expected=("( ) [ ] | . \\{ \\}",), found=c
            )
        kind = "left_delim" if side == "left" else "right_delim"
        self.emit(kind, start, value)

    def braced_word(self, start: int, label: str) -> str:
        self.skip_space()
        text, n = self.text, len(self.text)
        if self.i >= n or text[self.i] != "{":
            raise self.error(start, f"missing {{...}} {label}")
        close = text.find("}", self.i + 1)
        if close < 0:
            raise self.error(self.i, f"unterminated {label}")
        word = text[self.i + 1 : close]
        self.i = close + 1
        return word

    def environment_begin(self, start: int) -> None:
        env = self.braced_word(start, "environment name")
        colspec = ""
        if env == "array":
            colspec = self.braced_word(start, "column spec")
        self.emit("env_begin", start, env, colspec)
