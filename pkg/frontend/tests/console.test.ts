import { describe, expect, it } from "vitest";

import { ConsoleController } from "../src/console.js";
import { Transport } from "../src/transport.js";
import { EventRecord, encodeMessage } from "../src/wire.js";
import { cellSeqsAreOrdered, inputEnabled } from "../src/viewmodel.js";

class FakeTransport implements Transport {
  sent: string[] = [];
  closed = false;
  onLine: ((line: string) => void) | null = null;
  onClose: ((err?: Error) => void) | null = null;

  send(line: string): void {
    this.sent.push(line);
  }

  close(): void {
    this.closed = true;
  }

  push(line: string): void {
    if (this.onLine) {
      this.onLine(line);
    }
  }

  drop(err?: Error): void {
    if (this.onClose) {
      this.onClose(err);
    }
  }
}

function batch(sessionId: string, events: EventRecord[]): string {
  return encodeMessage({
    type: "event_batch",
    sessionId,
    body: {
      events: events.map((e) => ({ seq: e.seq, at: e.at, kind: e.kind, payload: e.payload })),
    },
  });
}

function errorLine(sessionId: string, code: string, message: string): string {
  return encodeMessage({ type: "error", sessionId, body: { code, message } });
}

const OPENING: EventRecord[] = [
  { seq: 0, at: 0, kind: "banner", payload: { text: "fake cas 1.0" } },
  { seq: 1, at: 0, kind: "input_prompt", payload: { label: "C1", text: "(C1) " } },
];

async function connected(): Promise<{ controller: ConsoleController; fake: FakeTransport }> {
  const fake = new FakeTransport();
  const controller = new ConsoleController(async () => fake);
  await controller.connectAndCreate({ profile: "maxima", mode: "replay", corpus: "demo" });
  fake.push(encodeMessage({ type: "session_created", sessionId: "s1", body: { profile: "maxima", mode: "replay" } }));
  fake.push(batch("s1", OPENING));
  return { controller, fake };
}

describe("connectAndCreate", () => {
  it("sends a canonical create_session and applies the opening batch", async () => {
    const { controller, fake } = await connected();
    expect(fake.sent[0]).toBe(
      '{"body":{"corpus":"demo","mode":"replay","profile":"maxima"},"type":"create_session","v":1}',
    );
    expect(controller.state.sessionId).toBe("s1");
    expect(controller.state.cells.map((c) => c.kind)).toEqual(["banner", "prompt"]);
    expect(controller.state.phase).toBe("at_prompt");
    expect(inputEnabled(controller.state)).toBe(true);
  });

  it("surfaces dial failures as an alert and recovers on retry", async () => {
    let attempts = 0;
    const fake = new FakeTransport();
    const controller = new ConsoleController(async () => {
      attempts += 1;
      if (attempts === 1) {
        throw new Error("refused");
      }
      return fake;
    });
    await controller.connectAndCreate({ profile: "maxima", mode: "replay", corpus: "demo" });
    expect(controller.state.connection).toBe("failed");
    expect(controller.state.alert).toContain("connection failed");
    expect(controller.state.alert).toContain("refused");

    // no session yet, so retry repeats the create
    await controller.reconnect();
    expect(controller.state.connection).toBe("connected");
    expect(fake.sent[0]).toContain('"type":"create_session"');
  });

  it("turns an unknown_profile error into a dismissible alert", async () => {
    const fake = new FakeTransport();
    const controller = new ConsoleController(async () => fake);
    await controller.connectAndCreate({ profile: "mystery", mode: "replay", corpus: "demo" });
    fake.push(errorLine("", "unknown_profile", "unknown profile 'mystery'"));
    expect(controller.state.alert).toBe("unknown_profile: unknown profile 'mystery'");
    controller.dismissAlert();
    expect(controller.state.alert).toBeNull();
  });
});

describe("submitInput", () => {
  it("reconciles the optimistic cell against the echo event", async () => {
    const { controller, fake } = await connected();
    controller.submitInput("1+1;");
    expect(fake.sent[1]).toBe('{"body":{"text":"1+1;"},"session_id":"s1","type":"send_input","v":1}');
    expect(controller.state.cells[2]).toMatchObject({ kind: "input", pending: true });

    fake.push(encodeMessage({ type: "input_accepted", sessionId: "s1", body: { text: "1+1;" } }));
    fake.push(
      batch("s1", [
        { seq: 2, at: 0, kind: "client_input", payload: { text: "1+1;" } },
        { seq: 3, at: 0, kind: "math", payload: { latex: "2", mathml: "<math><mn>2</mn></math>" } },
        { seq: 4, at: 0, kind: "input_prompt", payload: { label: "C2", text: "(C2) " } },
      ]),
    );
    expect(controller.state.cells.map((c) => c.kind)).toEqual([
      "banner",
      "prompt",
      "input",
      "math",
      "prompt",
    ]);
    expect(controller.state.cells[2]).toMatchObject({ kind: "input", pending: false, seq: 2 });
    expect(cellSeqsAreOrdered(controller.state.cells)).toBe(true);
  });

  it("shows server rejections inline and drops the optimistic cell", async () => {
    const { controller, fake } = await connected();
    controller.submitInput("nope;");
    fake.push(errorLine("s1", "replay_mismatch", "input 'nope;' does not match"));
    expect(controller.state.inlineError).toBe("input 'nope;' does not match");
    expect(controller.state.alert).toBeNull();
    expect(controller.state.cells.filter((c) => c.kind === "input").length).toBe(0);
    expect(inputEnabled(controller.state)).toBe(true);
  });

  it("routes answers through the same channel", async () => {
    const { controller, fake } = await connected();
    fake.push(
      batch("s1", [
        { seq: 2, at: 0, kind: "question", payload: { kind: "yes_no", label: "q", text: "sure?", answers: ["y", "n"] } },
      ]),
    );
    expect(controller.state.pendingQuestion?.answers).toEqual(["y", "n"]);
    controller.answerQuestion("y");
    expect(fake.sent[1]).toContain('"text":"y"');
  });
});

describe("connection loss", () => {
  it("resubscribes from the last seen event", async () => {
    const fake = new FakeTransport();
    const fake2 = new FakeTransport();
    const queue: Transport[] = [fake, fake2];
    const controller = new ConsoleController(async () => {
      const next = queue.shift();
      if (!next) {
        throw new Error("out of transports");
      }
      return next;
    });
    await controller.connectAndCreate({ profile: "maxima", mode: "replay", corpus: "demo" });
    fake.push(encodeMessage({ type: "session_created", sessionId: "s1", body: {} }));
    fake.push(batch("s1", OPENING));

    fake.drop(new Error("reset"));
    expect(controller.state.connection).toBe("disconnected");
    expect(controller.state.alert).toContain("connection lost");

    await controller.reconnect();
    expect(fake2.sent[0]).toBe('{"body":{"after_seq":1},"session_id":"s1","type":"subscribe","v":1}');

    // server resends everything; the view applies only the new tail
    fake2.push(
      batch("s1", [
        ...OPENING,
        { seq: 2, at: 0, kind: "plain_text", payload: { text: "still here" } },
      ]),
    );
    expect(controller.state.cells.length).toBe(3);
    expect(cellSeqsAreOrdered(controller.state.cells)).toBe(true);
  });

  it("stays quiet when the link closes after the session ended", async () => {
    const { controller, fake } = await connected();
    fake.push(batch("s1", [{ seq: 2, at: 0, kind: "session_end", payload: { reason: "end_marker", text: "The end" } }]));
    fake.drop();
    expect(controller.state.phase).toBe("ended");
    expect(controller.state.alert).toBeNull();
  });
});

describe("malformed server traffic", () => {
  it("flags undecodable lines without crashing", async () => {
    const { controller, fake } = await connected();
    fake.push("{broken json");
    expect(controller.state.alert).toContain("bad server message");
  });

  it("flags bad event records", async () => {
    const { controller, fake } = await connected();
    fake.push(
      encodeMessage({
        type: "event_batch",
        sessionId: "s1",
        body: { events: [{ seq: "x", at: 0, kind: "banner", payload: {} }] },
      }),
    );
    expect(controller.state.alert).toContain("bad event record");
  });
});
