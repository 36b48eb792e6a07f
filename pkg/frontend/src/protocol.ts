// Wire types for the session protocol, protocol_version 1.
// One JSON message per WebSocket text frame; the server is authoritative
// for all simulation state.

export const PROTOCOL_VERSION = 1;

export interface SceneEntryMsg {
  sprite: string;
  x: number;
  y: number;
  visible: boolean;
  size_percent: number;
  layer: number;
  costume: string | null;
}

export interface HelloMsg {
  type: "hello";
  protocol_version: number;
  projects: string[];
}

export interface StageInfo {
  w: number;
  h: number;
  tick_rate: number;
}

export interface CostumeRef {
  sprite: string;
  costume_id: string;
  file: string;
}

export interface LoadedMsg {
  type: "loaded";
  project_digest: string;
  stage: StageInfo;
  costumes: CostumeRef[];
}

export interface FrameMsg {
  type: "frame";
  tick: number;
  scene: SceneEntryMsg[];
}

export interface EventMsg {
  type: "event";
  tick: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface EndedMsg {
  type: "ended";
  tick: number;
}

export interface LogMsg {
  type: "log";
  playlog: string;
}

export interface ErrorMsg {
  type: "error";
  message: string;
}

export type ServerMsg =
  | HelloMsg
  | LoadedMsg
  | FrameMsg
  | EventMsg
  | EndedMsg
  | LogMsg
  | ErrorMsg;

const SERVER_TYPES = new Set([
  "hello",
  "loaded",
  "frame",
  "event",
  "ended",
  "log",
  "error",
]);

/** Parse one server frame; null for anything malformed or unknown. */
export function parseServerMessage(raw: string): ServerMsg | null {
  let value: unknown;
  try {
    value = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof value !== "object" || value === null) {
    return null;
  }
  const type = (value as { type?: unknown }).type;
  if (typeof type !== "string" || !SERVER_TYPES.has(type)) {
    return null;
  }
  return value as ServerMsg;
}
