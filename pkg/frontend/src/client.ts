// Stage protocol client over any WebSocket-shaped transport.
//
// The client is a dumb terminal: it forwards user intent upstream and
// routes server messages to handlers. It never mutates simulation state,
// so identical frame streams render identically regardless of tap timing.

import {
  EndedMsg,
  EventMsg,
  FrameMsg,
  HelloMsg,
  LoadedMsg,
  LogMsg,
  parseServerMessage,
} from "./protocol.js";

/** The subset of the browser WebSocket API the client needs. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((event: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface StageClientHandlers {
  onOpen?(): void;
  onHello?(msg: HelloMsg): void;
  onLoaded?(msg: LoadedMsg): void;
  onFrame?(msg: FrameMsg): void;
  onEvent?(msg: EventMsg): void;
  onEnded?(msg: EndedMsg): void;
  onLog?(msg: LogMsg): void;
  /** Protocol-level error reported by the server; connection stays open. */
  onServerError?(message: string): void;
  onSocketError?(event: unknown): void;
  onClose?(): void;
}

function browserSocketFactory(url: string): SocketLike {
  return new WebSocket(url) as unknown as SocketLike;
}

export class StageClient {
  private socket: SocketLike | null = null;

  constructor(
    private readonly url: string,
    private readonly handlers: StageClientHandlers,
    private readonly socketFactory: SocketFactory = browserSocketFactory,
  ) {}

  get connected(): boolean {
    return this.socket !== null;
  }

  connect(): void {
    if (this.socket) {
      return;
    }
    const socket = this.socketFactory(this.url);
    this.socket = socket;
    socket.onopen = () => this.handlers.onOpen?.();
    socket.onerror = (event) => this.handlers.onSocketError?.(event);
    socket.onclose = () => {
      this.socket = null;
      this.handlers.onClose?.();
    };
    socket.onmessage = (event) => {
      if (typeof event.data !== "string") {
        return;
      }
      const msg = parseServerMessage(event.data);
      if (!msg) {
        return;
      }
      switch (msg.type) {
        case "hello":
          this.handlers.onHello?.(msg);
          break;
        case "loaded":
          this.handlers.onLoaded?.(msg);
          break;
        case "frame":
          this.handlers.onFrame?.(msg);
          break;
        case "event":
          this.handlers.onEvent?.(msg);
          break;
        case "ended":
          this.handlers.onEnded?.(msg);
          break;
        case "log":
          this.handlers.onLog?.(msg);
          break;
        case "error":
          this.handlers.onServerError?.(msg.message);
          break;
      }
    };
  }

  close(): void {
    this.socket?.close();
  }

  private sendJson(payload: Record<string, unknown>): void {
    if (!this.socket) {
      throw new Error("not connected");
    }
    this.socket.send(JSON.stringify(payload));
  }

  load(projectName: string): void {
    this.sendJson({ type: "load", project_name: projectName });
  }

  start(seed: number): void {
    this.sendJson({ type: "start", seed });
  }

  tap(x: number, y: number): void {
    this.sendJson({ type: "tap", x, y });
  }

  stop(): void {
    this.sendJson({ type: "stop" });
  }

  saveLog(): void {
    this.sendJson({ type: "save_log" });
  }
}
