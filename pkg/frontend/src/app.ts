// Stage player page wiring: controls, canvas, tap capture, log download.
//
// All semantics live server-side; this file only forwards intent and
// paints what arrives. Frames are queued in arrival order and the newest
// one is painted on the next animation callback.

import { StageClient } from "./client.js";
import { canvasToStage, StageSize } from "./mapping.js";
import {
  BUBBLE_DISPLAY_MS,
  computeBubbleOps,
  computeDrawOps,
  imageKey,
  paintFrame,
  ResolvedImage,
  SpeakBubble,
} from "./renderer.js";
import { FrameMsg, LoadedMsg } from "./protocol.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const serverInput = el<HTMLInputElement>("server-url");
const connectButton = el<HTMLButtonElement>("connect");
const projectSelect = el<HTMLSelectElement>("project");
const loadButton = el<HTMLButtonElement>("load");
const seedInput = el<HTMLInputElement>("seed");
const startButton = el<HTMLButtonElement>("start");
const stopButton = el<HTMLButtonElement>("stop");
const saveButton = el<HTMLButtonElement>("save");
const banner = el<HTMLDivElement>("banner");
const soundIndicator = el<HTMLSpanElement>("sound");
const tickLabel = el<HTMLSpanElement>("tick");
const canvas = el<HTMLCanvasElement>("stage");

let client: StageClient | null = null;
let stage: StageSize = { width: canvas.width, height: canvas.height };
let projectName = "";
let running = false;
const images = new Map<string, ResolvedImage>();
const bubbles: SpeakBubble[] = [];
let pendingFrame: FrameMsg | null = null;
let lastFrame: FrameMsg | null = null;

function setBanner(text: string, isError: boolean): void {
  banner.textContent = text;
  banner.className = isError ? "banner error" : "banner";
}

function setControls(): void {
  const connected = client?.connected ?? false;
  connectButton.disabled = connected;
  loadButton.disabled = !connected;
  startButton.disabled = !connected || projectSelect.options.length === 0 || running;
  stopButton.disabled = !running;
  saveButton.disabled = !connected;
}

function assetBase(wsUrl: string): string {
  const url = new URL(wsUrl);
  url.protocol = url.protocol === "wss:" ? "https:" : "http:";
  url.pathname = "";
  url.search = "";
  return url.toString().replace(/\/$/, "");
}

function prefetchImages(loaded: LoadedMsg): void {
  images.clear();
  const base = assetBase(serverInput.value);
  for (const costume of loaded.costumes) {
    const key = imageKey(costume.sprite, costume.costume_id);
    const img = new Image();
    img.onload = () => {
      images.set(key, {
        width: img.naturalWidth,
        height: img.naturalHeight,
        source: img,
      });
    };
    img.onerror = () => {
      images.set(key, { width: 0, height: 0, source: null });
    };
    img.src = `${base}/assets/${encodeURIComponent(costume.sprite)}/${encodeURIComponent(costume.costume_id)}`;
  }
}

function paint(): void {
  if (pendingFrame) {
    lastFrame = pendingFrame;
    pendingFrame = null;
  }
  if (lastFrame) {
    const ctx = canvas.getContext("2d");
    if (ctx) {
      const ops = computeDrawOps(lastFrame.scene, images, stage);
      const bubbleOps = computeBubbleOps(lastFrame.scene, bubbles, performance.now(), stage);
      paintFrame(ctx, stage, ops, bubbleOps);
    }
    tickLabel.textContent = String(lastFrame.tick);
  }
  requestAnimationFrame(paint);
}

function connect(): void {
  client = new StageClient(serverInput.value, {
    onOpen: () => {
      setBanner("connected", false);
      setControls();
    },
    onHello: (msg) => {
      projectSelect.innerHTML = "";
      for (const name of msg.projects) {
        const option = document.createElement("option");
        option.value = name;
        option.textContent = name;
        projectSelect.appendChild(option);
      }
      setControls();
    },
    onLoaded: (msg) => {
      stage = { width: msg.stage.w, height: msg.stage.h };
      canvas.width = stage.width;
      canvas.height = stage.height;
      projectName = projectSelect.value;
      prefetchImages(msg);
      lastFrame = null;
      setBanner(`loaded ${projectName} (digest ${msg.project_digest.slice(0, 12)}…)`, false);
      setControls();
    },
    onFrame: (msg) => {
      pendingFrame = msg;
    },
    onEvent: (msg) => {
      if (msg.kind === "speak") {
        bubbles.push({
          sprite: String(msg.payload.sprite),
          text: String(msg.payload.text),
          expiresAt: performance.now() + BUBBLE_DISPLAY_MS,
        });
      } else if (msg.kind === "sound") {
        soundIndicator.textContent = `♪ ${String(msg.payload.sound)}`;
        setTimeout(() => {
          soundIndicator.textContent = "";
        }, 1500);
      }
    },
    onEnded: (msg) => {
      running = false;
      setBanner(`session ended at tick ${msg.tick}`, false);
      setControls();
    },
    onLog: (msg) => {
      const blob = new Blob([msg.playlog], { type: "application/x-ndjson" });
      const link = document.createElement("a");
      link.href = URL.createObjectURL(blob);
      link.download = `${projectName || "session"}.catplay.jsonl`;
      link.click();
      URL.revokeObjectURL(link.href);
    },
    onServerError: (message) => {
      setBanner(message, true);
    },
    onSocketError: () => {
      setBanner("connection error; check the server URL and retry", true);
    },
    onClose: () => {
      running = false;
      setBanner("disconnected; press Connect to retry", true);
      setControls();
    },
  });
  client.connect();
  setBanner("connecting…", false);
}

connectButton.addEventListener("click", connect);

loadButton.addEventListener("click", () => {
  running = false;
  client?.load(projectSelect.value);
});

startButton.addEventListener("click", () => {
  const seed = Number(seedInput.value || "0");
  if (!Number.isInteger(seed) || seed < 0) {
    setBanner("seed must be a non-negative integer", true);
    return;
  }
  running = true;
  bubbles.length = 0;
  client?.start(seed);
  setBanner("running", false);
  setControls();
});

stopButton.addEventListener("click", () => client?.stop());
saveButton.addEventListener("click", () => client?.saveLog());

canvas.addEventListener("click", (event) => {
  if (!running || !client) {
    return;
  }
  const rect = canvas.getBoundingClientRect();
  const px = ((event.clientX - rect.left) / rect.width) * canvas.width;
  const py = ((event.clientY - rect.top) / rect.height) * canvas.height;
  const point = canvasToStage(px, py, stage);
  if (point) {
    client.tap(point.x, point.y);
  }
});

setControls();
requestAnimationFrame(paint);
