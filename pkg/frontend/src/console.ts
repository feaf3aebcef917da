// Drives one bridge session over one connection. All server messages are
// applied on arrival, in order; the view model owns every bit of UI state.

import { Connector, Transport } from "./transport.js";
import {
  EventRecord,
  WireError,
  WireMessage,
  decodeMessage,
  encodeMessage,
  recordToEvent,
} from "./wire.js";
import { ConsoleViewModel, ConsoleViewState } from "./viewmodel.js";

export interface ConnectOptions {
  profile: string;
  mode: "replay" | "live";
  corpus?: string;
  command?: string;
}

// These mean "that input was wrong", not "the session is broken": show
// them next to the input box and keep going.
const INLINE_CODES = new Set(["wrong_state", "invalid_answer", "replay_mismatch"]);

function errText(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

export class ConsoleController {
  readonly vm = new ConsoleViewModel();
  private transport: Transport | null = null;
  private options: ConnectOptions | null = null;

  constructor(private readonly dial: Connector) {}

  get state(): ConsoleViewState {
    return this.vm.state;
  }

  set onChange(fn: ((state: ConsoleViewState) => void) | null) {
    this.vm.onChange = fn;
  }

  async connectAndCreate(options: ConnectOptions): Promise<void> {
    this.options = options;
    if (!(await this.open())) {
      return;
    }
    const body: Record<string, unknown> = {
      profile: options.profile,
      mode: options.mode,
    };
    if (options.corpus !== undefined) {
      body["corpus"] = options.corpus;
    }
    if (options.command !== undefined) {
      body["command"] = options.command;
    }
    this.send({ type: "create_session", sessionId: "", body });
  }

  // After a dropped connection: dial again and ask only for the tail.
  async reconnect(): Promise<void> {
    if (!this.vm.state.sessionId) {
      if (this.options) {
        await this.connectAndCreate(this.options);
      }
      return;
    }
    if (!(await this.open())) {
      return;
    }
    this.send({
      type: "subscribe",
      sessionId: this.vm.state.sessionId,
      body: { after_seq: this.vm.state.lastSeq },
    });
  }

  submitInput(text: string): void {
    if (!this.transport) {
      this.vm.fatalAlert("not connected");
      return;
    }
    this.vm.optimisticInput(text);
    this.send({
      type: "send_input",
      sessionId: this.vm.state.sessionId,
      body: { text },
    });
  }

  // Answers ride the same channel as ordinary input.
  answerQuestion(text: string): void {
    this.submitInput(text);
  }

  terminate(): void {
    if (this.transport && this.vm.state.sessionId) {
      this.send({
        type: "terminate",
        sessionId: this.vm.state.sessionId,
        body: {},
      });
    }
  }

  dismissAlert(): void {
    this.vm.dismissAlert();
  }

  close(): void {
    const t = this.transport;
    this.transport = null;
    if (t) {
      t.close();
    }
  }

  private async open(): Promise<boolean> {
    this.close();
    this.vm.setConnection("connecting");
    let transport: Transport;
    try {
      transport = await this.dial();
    } catch (err) {
      this.vm.setConnection("failed");
      this.vm.fatalAlert(`connection failed: ${errText(err)}`);
      return false;
    }
    transport.onLine = (line) => this.handleLine(line);
    transport.onClose = (err) => {
      if (this.transport !== transport) {
        return; // stale transport closing after a reconnect
      }
      this.transport = null;
      if (this.vm.state.phase !== "ended") {
        this.vm.setConnection("disconnected");
        if (err) {
          this.vm.fatalAlert(`connection lost: ${errText(err)}`);
        }
      }
    };
    this.transport = transport;
    this.vm.setConnection("connected");
    return true;
  }

  private send(msg: WireMessage): void {
    if (this.transport) {
      this.transport.send(encodeMessage(msg));
    }
  }

  private handleLine(line: string): void {
    let msg: WireMessage;
    try {
      msg = decodeMessage(line);
    } catch (err) {
      if (err instanceof WireError) {
        this.vm.fatalAlert(`bad server message: ${err.message}`);
        return;
      }
      throw err;
    }
    switch (msg.type) {
      case "session_created":
        this.vm.sessionCreated(msg.sessionId);
        break;
      case "input_accepted":
        this.vm.inputAccepted();
        break;
      case "event_batch":
        this.applyBatch(msg.body["events"]);
        break;
      case "error":
        this.applyError(msg.body);
        break;
      default:
        // Server echoed a client-only type; nothing sane to do with it.
        this.vm.fatalAlert(`unexpected message type ${JSON.stringify(msg.type)}`);
    }
  }

  private applyBatch(records: unknown): void {
    if (!Array.isArray(records)) {
      this.vm.fatalAlert("event_batch without events");
      return;
    }
    const events: EventRecord[] = [];
    for (const record of records) {
      try {
        events.push(recordToEvent(record));
      } catch (err) {
        this.vm.fatalAlert(`bad event record: ${errText(err)}`);
        return;
      }
    }
    this.vm.applyEvents(events);
  }

  private applyError(body: Record<string, unknown>): void {
    const code = typeof body["code"] === "string" ? (body["code"] as string) : "error";
    const message =
      typeof body["message"] === "string" ? (body["message"] as string) : "";
    if (INLINE_CODES.has(code) && this.vm.state.awaitingAck) {
      this.vm.inputRejected(message || code);
      return;
    }
    this.vm.fatalAlert(message ? `${code}: ${message}` : code);
  }
}
