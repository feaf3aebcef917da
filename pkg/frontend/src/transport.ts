// A transport delivers whole wire lines in both directions.
// The browser uses WebSocketTransport; tests inject a TCP one.

export interface Transport {
  send(line: string): void;
  close(): void;
  onLine: ((line: string) => void) | null;
  onClose: ((err?: Error) => void) | null;
}

export type Connector = () => Promise<Transport>;

interface WebSocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev: unknown) => void) | null;
  onerror: ((ev: unknown) => void) | null;
}

export class WebSocketTransport implements Transport {
  onLine: ((line: string) => void) | null = null;
  onClose: ((err?: Error) => void) | null = null;
  private closed = false;

  private constructor(private socket: WebSocketLike) {}

  static connect(
    url: string,
    factory?: (url: string) => WebSocketLike,
  ): Promise<WebSocketTransport> {
    const make =
      factory ??
      ((u: string) => new (globalThis as any).WebSocket(u) as WebSocketLike);
    return new Promise((resolve, reject) => {
      let socket: WebSocketLike;
      try {
        socket = make(url);
      } catch (err) {
        reject(err instanceof Error ? err : new Error(String(err)));
        return;
      }
      const transport = new WebSocketTransport(socket);
      socket.onopen = () => {
        socket.onerror = () => transport.dropped(new Error("websocket error"));
        resolve(transport);
      };
      socket.onerror = () => reject(new Error(`cannot connect to ${url}`));
      socket.onclose = () => transport.dropped();
      socket.onmessage = (ev) => {
        if (typeof ev.data === "string" && transport.onLine) {
          transport.onLine(ev.data);
        }
      };
    });
  }

  private dropped(err?: Error): void {
    if (this.closed) {
      return;
    }
    this.closed = true;
    if (this.onClose) {
      this.onClose(err);
    }
  }

  send(line: string): void {
    this.socket.send(line);
  }

  close(): void {
    this.closed = true;
    this.socket.close();
  }
}
