/** Thin wrappers over the player service's HTTP interface. */

import type { CatalogListing, Rgba } from "./view.js";

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(path, init);
  const body: unknown = await resp.json().catch(() => null);
  if (!resp.ok) {
    const detail =
      body && typeof body === "object" && "error" in body
        ? String((body as { error: unknown }).error)
        : resp.statusText;
    // surfaced verbatim in the UI; the server's message is the message
    throw new ApiError(resp.status, detail);
  }
  return body as T;
}

export interface StateReply {
  session_started: boolean;
  mode: Record<string, unknown>;
  pending_mode: Record<string, unknown> | null;
  fps: number;
  frames_emitted: number;
  sequence_remaining: number;
  device_connected: boolean;
  eyes: Record<string, { sequence: number | null; pixels: Rgba[] }>;
}

export function getState(): Promise<StateReply> {
  return request("/api/state");
}

export function getCatalog(): Promise<CatalogListing> {
  return request("/api/catalog");
}

export function postMode(mode: Record<string, unknown>): Promise<unknown> {
  return request("/api/mode", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(mode),
  });
}

export interface SequenceRequest {
  ids?: string[];
  dwell_ms: number;
  randomize: boolean;
  seed?: number;
}

export interface SequenceReply {
  order: string[];
  dwell_ms: number;
}

export function postSequence(req: SequenceRequest): Promise<SequenceReply> {
  return request("/api/sequence", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(req),
  });
}

export interface FrameEvent {
  eye_id: number;
  sequence: number;
  t_ms: number;
  pixels: Rgba[];
}

/** One stream subscription for the page; reconnects are the caller's call. */
export function openFrameStream(
  onFrame: (event: FrameEvent) => void,
  onDrop: () => void,
): () => void {
  const source = new EventSource("/api/frames");
  source.onmessage = (msg) => {
    try {
      onFrame(JSON.parse(msg.data) as FrameEvent);
    } catch {
      // a malformed event is dropped; the next frame supersedes it anyway
    }
  };
  source.onerror = () => onDrop();
  return () => source.close();
}
