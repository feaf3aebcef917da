"""Wire protocol: newline-delimited JSON messages between client and server.

One message per line.  Every message carries a version field ``v``; the
``direction`` of a message is implied by its type, never sent on the wire.

Client to server:

    {"v":1,"type":"create_session","body":{"profile":"maxima","mode":"replay","corpus":"maxima_session"}}
    {"v":1,"type":"send_input","session_id":"s1","body":{"text":"fac(5);"}}
    {"v":1,"type":"subscribe","session_id":"s1","body":{"after_seq":-1}}
    {"v":1,"type":"terminate","session_id":"s1","body":{}}

Server to client:

    {"v":1,"type":"session_created","session_id":"s1","body":{"mode":"replay","profile":"maxima"}}
    {"v":1,"type":"input_accepted","session_id":"s1","body":{"text":"fac(5);"}}
    {"v":1,"type":"event_batch","session_id":"s1","body":{"events":[...]}}
    {"v":1,"type":"error","body":{"code":"unknown_session","message":"..."}}

Events inside a batch use the same record shape as transcript lines:
``{"seq","at","kind","payload"}``.  Batches preserve seq order and are
gapless per subscription, so a client's resume cursor is simply the last
seq it has seen.

Encoding is canonical (sorted keys, no spaces): byte-for-byte stable for
golden-file comparison.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from casbridge.session import EVENT_KINDS, SessionEvent

WIRE_VERSION = 1

CLIENT_TYPES = ("create_session", "send_input", "subscribe", "terminate")
SERVER_TYPES = ("session_created", "input_accepted", "event_batch", "error")
MESSAGE_TYPES = CLIENT_TYPES + SERVER_TYPES


class WireError(ValueError):
    """Malformed wire message."""


@dataclass(frozen=True)
class WireMessage:
    type: str
    session_id: str = ""
    body: dict = field(default_factory=dict)

    @property
    def direction(self) -> str:
        return "client_to_server" if self.type in CLIENT_TYPES else "server_to_client"


def encode_message(msg: WireMessage) -> str:
    """One line of wire text, without the trailing newline."""
    record: dict = {"v": WIRE_VERSION, "type": msg.type}
    if msg.session_id:
        record["session_id"] = msg.session_id
    record["body"] = msg.body
    return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def decode_message(line: str) -> WireMessage:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise WireError(f"not valid JSON: {exc}") from exc
    if not isinstance(record, dict):
        raise WireError("message must be a JSON object")
    if record.get("v") != WIRE_VERSION:
        raise WireError(f"unsupported wire version {record.get('v')!r}")
    mtype = record.get("type")
    if mtype not in MESSAGE_TYPES:
        raise WireError(f"unknown message type {mtype!r}")
    session_id = record.get("session_id", "")
    if not isinstance(session_id, str):
        raise WireError("session_id must be a string")
    body = record.get("body", {})
    if not isinstance(body, dict):
        raise WireError("body must be an object")
    return WireMessage(mtype, session_id, body)


def event_to_record(event: SessionEvent) -> dict:
    return {
        "seq": event.seq,
        "at": event.at,
        "kind": event.kind,
        "payload": event.payload,
    }


def record_to_event(record: dict) -> SessionEvent:
    if not isinstance(record, dict):
        raise WireError("event record must be an object")
    try:
        seq = record["seq"]
        at = record["at"]
        kind = record["kind"]
        payload = record["payload"]
    except KeyError as exc:
        raise WireError(f"event record missing {exc}") from exc
    if not isinstance(seq, int) or not isinstance(at, (int, float)):
        raise WireError("event record has bad seq/at types")
    if kind not in EVENT_KINDS:
        raise WireError(f"unknown event kind {kind!r}")
    if not isinstance(payload, dict):
        raise WireError("event payload must be an object")
    return SessionEvent(seq, float(at), kind, payload)
