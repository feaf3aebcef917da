// Console view state: an ordered list of transcript cells driven by wire
// events, plus the little bits of UI truth derived from them (whether the
// input box is live, whether a question is waiting).

import { EventRecord } from "./wire.js";

export type Cell =
  | { kind: "banner"; seq: number; text: string }
  | { kind: "prompt"; seq: number; label: string; text: string; aux: string }
  | { kind: "input"; seq: number | null; text: string; pending: boolean }
  | { kind: "math"; seq: number; mathml: string; latex: string }
  | { kind: "math-source"; seq: number; latex: string }
  | { kind: "text"; seq: number; text: string }
  | {
      kind: "question";
      seq: number;
      text: string;
      questionKind: string;
      answers: string[];
    }
  | { kind: "plot"; seq: number; path: string; text: string }
  | { kind: "end"; seq: number; reason: string; text: string };

export type ConnectionStatus =
  | "disconnected"
  | "connecting"
  | "connected"
  | "failed";

export type Phase =
  | "starting"
  | "at_prompt"
  | "computing"
  | "awaiting_answer"
  | "ended";

export interface PendingQuestion {
  text: string;
  questionKind: string;
  answers: string[];
}

export interface ConsoleViewState {
  connection: ConnectionStatus;
  sessionId: string;
  cells: Cell[];
  phase: Phase;
  pendingQuestion: PendingQuestion | null;
  awaitingAck: boolean;
  lastSeq: number;
  alert: string | null;
  inlineError: string | null;
}

export function initialState(): ConsoleViewState {
  return {
    connection: "disconnected",
    sessionId: "",
    cells: [],
    phase: "starting",
    pendingQuestion: null,
    awaitingAck: false,
    lastSeq: -1,
    alert: null,
    inlineError: null,
  };
}

// The input box is usable exactly when the backend is waiting on us.
export function inputEnabled(state: ConsoleViewState): boolean {
  return (
    state.connection === "connected" &&
    !state.awaitingAck &&
    (state.phase === "at_prompt" || state.phase === "awaiting_answer")
  );
}

// Cheap well-formedness check so a broken payload never renders as a
// blank cell. Accepts exactly one <math> element with balanced tags.
export function isRenderableMathml(source: string): boolean {
  const text = source.trim();
  if (!text.startsWith("<math") || !text.endsWith("</math>")) {
    return false;
  }
  const stack: string[] = [];
  const tag = /<\/?([a-zA-Z][a-zA-Z0-9]*)((?:[^"'>]|"[^"]*"|'[^']*')*?)(\/?)>/g;
  let at = 0;
  let match: RegExpExecArray | null;
  while ((match = tag.exec(text)) !== null) {
    if (text.slice(at, match.index).includes("<")) {
      return false; // stray angle bracket outside a tag
    }
    at = match.index + match[0].length;
    const [, name, , selfClose] = match;
    if (match[0].startsWith("</")) {
      if (stack.pop() !== name) {
        return false;
      }
    } else if (!selfClose) {
      stack.push(name as string);
    }
  }
  return stack.length === 0 && !text.slice(at).includes("<");
}

function cellFor(event: EventRecord): Cell {
  const p = event.payload;
  const str = (key: string): string =>
    typeof p[key] === "string" ? (p[key] as string) : "";
  switch (event.kind) {
    case "banner":
      return { kind: "banner", seq: event.seq, text: str("text") };
    case "input_prompt":
      return {
        kind: "prompt",
        seq: event.seq,
        label: str("label"),
        text: str("text"),
        aux: "",
      };
    case "aux_prompt":
      return {
        kind: "prompt",
        seq: event.seq,
        label: str("label"),
        text: str("text"),
        aux: str("kind"),
      };
    case "client_input":
      return { kind: "input", seq: event.seq, text: str("text"), pending: false };
    case "math": {
      const mathml = str("mathml");
      if (mathml && isRenderableMathml(mathml)) {
        return { kind: "math", seq: event.seq, mathml, latex: str("latex") };
      }
      return { kind: "math-source", seq: event.seq, latex: str("latex") };
    }
    case "plain_text":
      return { kind: "text", seq: event.seq, text: str("text") };
    case "question":
      return {
        kind: "question",
        seq: event.seq,
        text: str("text"),
        questionKind: str("kind"),
        answers: Array.isArray(p["answers"]) ? (p["answers"] as string[]) : [],
      };
    case "plot_event":
      return { kind: "plot", seq: event.seq, path: str("path"), text: str("text") };
    case "session_end":
      return { kind: "end", seq: event.seq, reason: str("reason"), text: str("text") };
  }
}

export class ConsoleViewModel {
  readonly state: ConsoleViewState = initialState();
  onChange: ((state: ConsoleViewState) => void) | null = null;

  // Phase to fall back to if the in-flight input gets rejected.
  private stash: { phase: Phase; question: PendingQuestion | null } | null = null;

  private notify(): void {
    if (this.onChange) {
      this.onChange(this.state);
    }
  }

  setConnection(status: ConnectionStatus): void {
    this.state.connection = status;
    if (status !== "connected") {
      this.state.awaitingAck = false;
      this.stash = null;
      // Unconfirmed input is gone; resubscribing replays what the
      // server really saw.
      while (true) {
        const last = this.state.cells[this.state.cells.length - 1];
        if (last && last.kind === "input" && last.pending) {
          this.state.cells.pop();
        } else {
          break;
        }
      }
    }
    this.notify();
  }

  sessionCreated(sessionId: string): void {
    this.state.sessionId = sessionId;
    this.notify();
  }

  // The user hit enter: show the input immediately and treat the prompt
  // as consumed. Acceptance is reconciled later; rejection rolls back.
  optimisticInput(text: string): void {
    this.state.cells.push({ kind: "input", seq: null, text, pending: true });
    this.stash = {
      phase: this.state.phase,
      question: this.state.pendingQuestion,
    };
    this.state.phase = "computing";
    this.state.pendingQuestion = null;
    this.state.awaitingAck = true;
    this.state.inlineError = null;
    this.notify();
  }

  inputAccepted(): void {
    this.state.awaitingAck = false;
    this.stash = null;
    this.notify();
  }

  // The server refused the input: drop the optimistic cell, restore the
  // prompt or question it was answering, and keep the error next to the
  // input box rather than in the transcript.
  inputRejected(message: string): void {
    const last = this.state.cells[this.state.cells.length - 1];
    if (last && last.kind === "input" && last.pending) {
      this.state.cells.pop();
    }
    if (this.stash) {
      this.state.phase = this.stash.phase;
      this.state.pendingQuestion = this.stash.question;
      this.stash = null;
    }
    this.state.awaitingAck = false;
    this.state.inlineError = message;
    this.notify();
  }

  fatalAlert(message: string): void {
    this.state.alert = message;
    this.notify();
  }

  dismissAlert(): void {
    this.state.alert = null;
    this.notify();
  }

  applyEvents(events: EventRecord[]): void {
    for (const event of events) {
      this.applyEvent(event);
    }
    this.notify();
  }

  private applyEvent(event: EventRecord): void {
    if (event.seq <= this.state.lastSeq) {
      return; // duplicate delivery (reconnect replays the tail)
    }
    this.state.lastSeq = event.seq;
    if (event.kind === "client_input") {
      // Claim the optimistic cell instead of appending a twin.
      const pending = this.state.cells.findIndex(
        (c) => c.kind === "input" && c.pending,
      );
      if (pending >= 0) {
        const cell = this.state.cells[pending] as Cell & { kind: "input" };
        cell.seq = event.seq;
        cell.pending = false;
      } else {
        this.state.cells.push(cellFor(event));
      }
    } else {
      this.state.cells.push(cellFor(event));
    }
    switch (event.kind) {
      case "input_prompt":
      case "aux_prompt":
        this.state.phase = "at_prompt";
        this.state.pendingQuestion = null;
        break;
      case "question":
        this.state.phase = "awaiting_answer";
        this.state.pendingQuestion = {
          text: typeof event.payload["text"] === "string" ? (event.payload["text"] as string) : "",
          questionKind:
            typeof event.payload["kind"] === "string" ? (event.payload["kind"] as string) : "",
          answers: Array.isArray(event.payload["answers"])
            ? (event.payload["answers"] as string[])
            : [],
        };
        break;
      case "client_input":
        this.state.phase = "computing";
        this.state.pendingQuestion = null;
        break;
      case "session_end":
        this.state.phase = "ended";
        this.state.pendingQuestion = null;
        break;
      default:
        break;
    }
  }
}

// Long sessions render a window, not the whole list.
export function windowCells(
  cells: Cell[],
  max = 500,
): { hidden: number; visible: Cell[] } {
  if (cells.length <= max) {
    return { hidden: 0, visible: cells };
  }
  return { hidden: cells.length - max, visible: cells.slice(cells.length - max) };
}

// Test hook: transcript order must match event order.
export function cellSeqsAreOrdered(cells: Cell[]): boolean {
  let last = -1;
  for (const cell of cells) {
    if (cell.seq === null) {
      continue; // optimistic input not yet reconciled
    }
    if (cell.seq <= last) {
      return false;
    }
    last = cell.seq;
  }
  return true;
}
