// Wire protocol: newline-delimited JSON messages, version 1.
// Mirrors the service's encoding; the integration tests talk to the real
// server with these functions.

export const WIRE_VERSION = 1;

export const CLIENT_TYPES = [
  "create_session",
  "send_input",
  "subscribe",
  "terminate",
] as const;

export const SERVER_TYPES = [
  "session_created",
  "input_accepted",
  "event_batch",
  "error",
] as const;

export type ClientType = (typeof CLIENT_TYPES)[number];
export type ServerType = (typeof SERVER_TYPES)[number];
export type MessageType = ClientType | ServerType;

export const EVENT_KINDS = [
  "banner",
  "input_prompt",
  "aux_prompt",
  "client_input",
  "math",
  "plain_text",
  "question",
  "plot_event",
  "session_end",
] as const;

export type EventKind = (typeof EVENT_KINDS)[number];

export interface WireMessage {
  type: MessageType;
  sessionId: string;
  body: Record<string, unknown>;
}

export interface EventRecord {
  seq: number;
  at: number;
  kind: EventKind;
  payload: Record<string, unknown>;
}

export class WireError extends Error {}

function isType(value: unknown): value is MessageType {
  return (
    typeof value === "string" &&
    ([...CLIENT_TYPES, ...SERVER_TYPES] as string[]).includes(value)
  );
}

// Canonical form: keys sorted, no whitespace. Matches the server's own
// encoder for the value shapes client messages carry.
function canonical(value: unknown): string {
  if (value === null || typeof value !== "object") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(canonical).join(",") + "]";
  }
  const entries = Object.entries(value as Record<string, unknown>)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([k, v]) => JSON.stringify(k) + ":" + canonical(v));
  return "{" + entries.join(",") + "}";
}

export function encodeMessage(msg: WireMessage): string {
  const record: Record<string, unknown> = { v: WIRE_VERSION, type: msg.type };
  if (msg.sessionId) {
    record["session_id"] = msg.sessionId;
  }
  record["body"] = msg.body;
  return canonical(record);
}

export function decodeMessage(line: string): WireMessage {
  let record: unknown;
  try {
    record = JSON.parse(line);
  } catch (err) {
    throw new WireError(`not valid JSON: ${err}`);
  }
  if (record === null || typeof record !== "object" || Array.isArray(record)) {
    throw new WireError("message must be a JSON object");
  }
  const obj = record as Record<string, unknown>;
  if (obj["v"] !== WIRE_VERSION) {
    throw new WireError(`unsupported wire version ${JSON.stringify(obj["v"])}`);
  }
  if (!isType(obj["type"])) {
    throw new WireError(`unknown message type ${JSON.stringify(obj["type"])}`);
  }
  const sessionId = obj["session_id"] ?? "";
  if (typeof sessionId !== "string") {
    throw new WireError("session_id must be a string");
  }
  const body = obj["body"] ?? {};
  if (body === null || typeof body !== "object" || Array.isArray(body)) {
    throw new WireError("body must be an object");
  }
  return { type: obj["type"], sessionId, body: body as Record<string, unknown> };
}

export function recordToEvent(record: unknown): EventRecord {
  if (record === null || typeof record !== "object" || Array.isArray(record)) {
    throw new WireError("event record must be an object");
  }
  const obj = record as Record<string, unknown>;
  const { seq, at, kind, payload } = obj;
  if (typeof seq !== "number" || !Number.isInteger(seq)) {
    throw new WireError("event record has bad seq");
  }
  if (typeof at !== "number") {
    throw new WireError("event record has bad at");
  }
  if (typeof kind !== "string" || !(EVENT_KINDS as readonly string[]).includes(kind)) {
    throw new WireError(`unknown event kind ${JSON.stringify(kind)}`);
  }
  if (payload === null || typeof payload !== "object" || Array.isArray(payload)) {
    throw new WireError("event payload must be an object");
  }
  return {
    seq,
    at,
    kind: kind as EventKind,
    payload: payload as Record<string, unknown>,
  };
}
