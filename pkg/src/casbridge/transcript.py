"""Transcript files: newline-delimited JSON event logs.

Line 1 is a header record naming the format and version; each further line
is one event.  An empty event list persists as an empty file.  Floats
round-trip exactly (shortest-repr JSON encoding), so load(persist(events))
compares equal to the original list.
"""

from __future__ import annotations

import json
from pathlib import Path

from casbridge.session import EVENT_KINDS, SessionEvent

TRANSCRIPT_FORMAT = "casbridge-transcript"
TRANSCRIPT_VERSION = 1


class TranscriptError(ValueError):
    pass


def persist_transcript(events: list[SessionEvent], dest: str | Path) -> None:
    Path(dest).write_bytes(dumps_transcript(events))


def dumps_transcript(events: list[SessionEvent]) -> bytes:
    if not events:
        return b""
    lines = [
        json.dumps(
            {"format": TRANSCRIPT_FORMAT, "version": TRANSCRIPT_VERSION},
            sort_keys=True,
            separators=(",", ":"),
        )
    ]
    for event in events:
        lines.append(
            json.dumps(
                {
                    "seq": event.seq,
                    "at": event.at,
                    "kind": event.kind,
                    "payload": event.payload,
                },
                sort_keys=True,
                separators=(",", ":"),
            )
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def load_transcript(src: str | Path) -> list[SessionEvent]:
    return loads_transcript(Path(src).read_bytes())


def loads_transcript(data: bytes) -> list[SessionEvent]:
    text = data.decode("utf-8")
    if not text.strip():
        return []
    lines = text.splitlines()
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise TranscriptError(f"line 1: bad header: {exc}") from exc
    if not isinstance(header, dict) or header.get("format") != TRANSCRIPT_FORMAT:
        raise TranscriptError("line 1: not a transcript header")
    if header.get("version") != TRANSCRIPT_VERSION:
        raise TranscriptError(f"unsupported version {header.get('version')!r}")
    events: list[SessionEvent] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TranscriptError(f"line {lineno}: bad JSON: {exc}") from exc
        if not isinstance(record, dict):
            raise TranscriptError(f"line {lineno}: not an object")
        try:
            seq = record["seq"]
            at = record["at"]
            kind = record["kind"]
            payload = record["payload"]
        except KeyError as exc:
            raise TranscriptError(f"line {lineno}: missing {exc}") from exc
        if not isinstance(seq, int) or not isinstance(at, (int, float)):
            raise TranscriptError(f"line {lineno}: bad seq/at types")
        if kind not in EVENT_KINDS:
            raise TranscriptError(f"line {lineno}: unknown event kind {kind!r}")
        if not isinstance(payload, dict):
            raise TranscriptError(f"line {lineno}: payload must be an object")
        events.append(SessionEvent(seq, float(at), kind, payload))
    return events
