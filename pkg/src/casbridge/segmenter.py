"""Incremental segmentation of a backend's raw output stream.

The stream mixes free text with framed payloads: a frame is control byte
0x02, an ASCII tag ending in ``:``, the payload, and the 0x05 terminator.
Frames tagged ``latex:`` become math segments; frames with any other tag
(or no tag) fall back to plain text, raw bytes preserved.

Prompts and questions are only *suggested* by their text; they become real
once the stream goes quiet.  The caller reports quiescence explicitly via
``quiescence_tick`` (the session layer derives it from a timer in live mode
and from scripted markers in replay).  Until then a candidate line is held:
if more bytes arrive first, it demotes to plain output.

Invariants the tests pin down:

- losslessness: concatenating ``raw`` over all emitted segments reproduces
  the input byte stream exactly
- chunk independence: any split of the stream into feed() calls yields the
  same segment sequence, provided ticks happen at the same byte positions
- only math and plain segments may contain the frame-open byte

``feed`` never emits by itself; completed segments queue up for ``drain``.
``quiescence_tick`` and ``close`` flush and return what they flushed (the
flushed segments join the same drain queue).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from casbridge.profiles import BackendProfile, Classification, QuestionRule, classify_line

FRAME_OPEN = 0x02
FRAME_CLOSE = 0x05
MATH_TAG = b"latex"

SEGMENT_KINDS = (
    "banner",
    "input_prompt",
    "aux_prompt",
    "math",
    "plain_text",
    "question",
    "plot_event",
    "session_end",
)

# Kinds that require quiescence before they may be emitted.
_HELD_KINDS = ("input_prompt", "aux_prompt", "question")


@dataclass(frozen=True)
class Segment:
    kind: str
    raw: bytes
    start: int
    end: int
    label: str = ""
    aux_kind: str = ""
    latex: str = ""
    question_rule: QuestionRule | None = None

    @property
    def text(self) -> str:
        return self.raw.decode("utf-8", errors="replace")


def _line_text(raw: bytes) -> str:
    text = raw.decode("utf-8", errors="replace")
    if text.endswith("\r\n"):
        return text[:-2]
    if text.endswith("\n"):
        return text[:-1]
    return text


class StreamSegmenter:
    def __init__(self, profile: BackendProfile):
        self.profile = profile
        self._pending = bytearray()
        self._in_frame = False
        self._frame_buf = bytearray()
        self._held: tuple[bytes, Classification] | None = None
        self._banner_active = True
        self._banner_parts: list[bytes] = []
        self._queue: list[Segment] = []
        self._offset = 0
        self._closed = False

    # -- public ops --------------------------------------------------------

    def feed(self, data: bytes) -> None:
        if self._closed:
            raise ValueError("segmenter is closed")
        if not data:
            return
        self._pending += data
        self._scan()

    def drain(self) -> list[Segment]:
        out = self._queue
        self._queue = []
        return out

    def quiescence_tick(self) -> list[Segment]:
        """The stream went silent: resolve held and buffered data."""
        if self._closed:
            return []
        mark = len(self._queue)
        if self._in_frame:
            # A half-received frame survives quiescence untouched.
            return []
        if self._held is not None:
            raw, cls = self._held
            self._held = None
            self._emit_classified(raw, cls)
        elif self._pending:
            raw = bytes(self._pending)
            self._pending.clear()
            cls = classify_line(self.profile, _line_text(raw))
            self._emit_classified(raw, cls)
        if self._banner_active and self._banner_parts:
            self._flush_banner()
        return self._queue[mark:]

    def close(self) -> list[Segment]:
        """End of stream: flush everything, partial frames as plain text."""
        if self._closed:
            return []
        mark = len(self._queue)
        if self._in_frame:
            self._in_frame = False
            if self._frame_buf:
                self._emit("plain_text", bytes(self._frame_buf))
            self._frame_buf = bytearray()
        if self._held is not None:
            raw, cls = self._held
            self._held = None
            self._emit_classified(raw, cls)
        if self._pending:
            raw = bytes(self._pending)
            self._pending.clear()
            cls = classify_line(self.profile, _line_text(raw))
            self._emit_classified(raw, cls)
        if self._banner_active and self._banner_parts:
            self._flush_banner()
        self._closed = True
        return self._queue[mark:]

    # -- scanning ----------------------------------------------------------

    def _scan(self) -> None:
        while True:
            if self._held is not None:
                if not self._pending:
                    return
                # New bytes arrived before quiescence: the candidate was
                # ordinary output after all.
                raw, cls = self._held
                self._held = None
                self._emit_demoted(raw)
            if self._in_frame:
                idx = self._pending.find(FRAME_CLOSE)
                if idx < 0:
                    self._frame_buf += self._pending
                    self._pending.clear()
                    return
                self._frame_buf += self._pending[: idx + 1]
                del self._pending[: idx + 1]
                self._in_frame = False
                self._finish_frame(bytes(self._frame_buf))
                self._frame_buf = bytearray()
                continue
            nl = self._pending.find(b"\n")
            fs = self._pending.find(FRAME_OPEN)
            if nl < 0 and fs < 0:
                return
            if fs >= 0 and (nl < 0 or fs < nl):
                prefix = bytes(self._pending[:fs])
                del self._pending[:fs]
                if prefix:
                    self._emit_plainish(prefix)
                self._flush_banner()
                self._in_frame = True
                self._frame_buf = bytearray([FRAME_OPEN])
                del self._pending[:1]
            else:
                line = bytes(self._pending[: nl + 1])
                del self._pending[: nl + 1]
                self._terminated_line(line)

    def _terminated_line(self, raw: bytes) -> None:
        cls = classify_line(self.profile, _line_text(raw))
        if cls.kind in _HELD_KINDS:
            self._held = (raw, cls)
            return
        self._emit_classified(raw, cls)

    def _finish_frame(self, raw: bytes) -> None:
        inner = raw[1:-1]
        colon = inner.find(b":")
        if colon >= 0 and inner[:colon] == MATH_TAG:
            payload = inner[colon + 1 :].decode("utf-8", errors="replace")
            self._emit("math", raw, latex=payload)
        else:
            self._emit("plain_text", raw)

    # -- emission ----------------------------------------------------------

    def _emit(self, kind: str, raw: bytes, **fields: object) -> None:
        start = self._offset
        self._offset += len(raw)
        self._queue.append(Segment(kind, raw, start, self._offset, **fields))

    def _emit_plainish(self, raw: bytes) -> None:
        if self._banner_active:
            self._banner_parts.append(raw)
        else:
            self._emit("plain_text", raw)

    def _emit_demoted(self, raw: bytes) -> None:
        """A held prompt/question line turned out to be mid-stream output."""
        cls = classify_line(self.profile, _line_text(raw))
        if cls.kind == "plot_event":
            self._flush_banner()
            self._emit("plot_event", raw, label=cls.label)
        else:
            self._emit_plainish(raw)

    def _emit_classified(self, raw: bytes, cls: Classification) -> None:
        if cls.kind == "plain":
            self._emit_plainish(raw)
            return
        self._flush_banner()
        if cls.kind == "end_marker":
            self._emit("session_end", raw)
        elif cls.kind == "plot_event":
            self._emit("plot_event", raw, label=cls.label)
        elif cls.kind == "input_prompt":
            self._emit("input_prompt", raw, label=cls.label)
        elif cls.kind == "aux_prompt":
            self._emit("aux_prompt", raw, label=cls.label, aux_kind=cls.aux_kind)
        elif cls.kind == "question":
            rule = cls.rule
            assert rule is not None
            self._emit("question", raw, label=rule.label, question_rule=rule)
        else:  # pragma: no cover - classify_line kinds are closed
            raise AssertionError(cls.kind)

    def _flush_banner(self) -> None:
        if not self._banner_active:
            return
        self._banner_active = False
        if not self._banner_parts:
            return
        raw = b"".join(self._banner_parts)
        self._banner_parts = []
        text = raw.decode("utf-8", errors="replace")
        if re.search(self.profile.banner_pattern, text, re.MULTILINE):
            self._emit("banner", raw)
        else:
            self._emit("plain_text", raw)
