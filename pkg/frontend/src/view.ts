/** Pure view logic: everything here is plain data in, plain data out,
 * so the rendering rules can be tested without a browser.  The canvas
 * and fetch plumbing live in main.ts / api.ts.
 */

import {
  DISC_RADIUS,
  INNER_COUNT,
  OUTER_COUNT,
  discCenter,
  type RingName,
} from "./geometry.js";

export type Rgba = readonly [number, number, number, number];

export const PIXELS_PER_EYE = OUTER_COUNT + INNER_COUNT;
export const STALE_AFTER_MS = 1000;

export interface CatalogEntry {
  id: string;
  gloss: string;
}

export interface CatalogListing {
  active: CatalogEntry[];
  ocular: CatalogEntry[];
  gaze_angles: number[];
}

export interface EyeView {
  pixels: Rgba[];
  sequence: number | null;
  lastFrameAtMs: number | null;
}

export interface SequenceRun {
  order: string[];
  dwellMs: number;
  startedAtMs: number;
}

export interface ConsoleViewState {
  eyes: [EyeView, EyeView];
  mode: Record<string, unknown> | null;
  catalog: CatalogListing | null;
  sequence: SequenceRun | null;
  lastError: string | null;
}

export function blankPixels(): Rgba[] {
  return Array.from({ length: PIXELS_PER_EYE }, () => [0, 0, 0, 0] as Rgba);
}

export function initialState(): ConsoleViewState {
  const eye = (): EyeView => ({
    pixels: blankPixels(),
    sequence: null,
    lastFrameAtMs: null,
  });
  return {
    eyes: [eye(), eye()],
    mode: null,
    catalog: null,
    sequence: null,
    lastError: null,
  };
}

/** Brightness rule shared with the device: channel scaled by alpha. */
export function renderedRgb(p: Rgba): [number, number, number] {
  const [r, g, b, a] = p;
  return [
    Math.floor((r * a + 127) / 255),
    Math.floor((g * a + 127) / 255),
    Math.floor((b * a + 127) / 255),
  ];
}

export interface DiscOp {
  x: number;
  y: number;
  radius: number;
  rgb: [number, number, number];
  ring: RingName;
  index: number;
}

/**
 * Turn one eye's 40 pixels into draw operations.
 *
 * Pixel order matches the wire format: outer indices 0..23 first, then
 * inner 0..15.  Unlit discs (rendered black) are skipped, exactly like
 * the server's rasterizer, so the background shows through.
 */
export function discOps(pixels: Rgba[], panel = 0): DiscOp[] {
  if (pixels.length !== PIXELS_PER_EYE) {
    throw new RangeError(`expected ${PIXELS_PER_EYE} pixels, got ${pixels.length}`);
  }
  const ops: DiscOp[] = [];
  pixels.forEach((p, i) => {
    const rgb = renderedRgb(p);
    if (rgb[0] === 0 && rgb[1] === 0 && rgb[2] === 0) {
      return;
    }
    const ring: RingName = i < OUTER_COUNT ? "outer" : "inner";
    const index = i < OUTER_COUNT ? i : i - OUTER_COUNT;
    const { x, y } = discCenter(ring, index, panel);
    ops.push({ x, y, radius: DISC_RADIUS, rgb, ring, index });
  });
  return ops;
}

export function applyFrame(
  state: ConsoleViewState,
  eyeId: number,
  pixels: Rgba[],
  sequence: number | null,
  atMs: number,
): ConsoleViewState {
  if (eyeId !== 0 && eyeId !== 1) {
    return state;
  }
  const eyes: [EyeView, EyeView] = [state.eyes[0], state.eyes[1]];
  eyes[eyeId] = { pixels, sequence, lastFrameAtMs: atMs };
  return { ...state, eyes };
}

export function isStale(lastFrameAtMs: number | null, nowMs: number): boolean {
  return lastFrameAtMs === null || nowMs - lastFrameAtMs > STALE_AFTER_MS;
}

export function connectionLabel(
  state: ConsoleViewState,
  nowMs: number,
): "live" | "stale" {
  const fresh = state.eyes.some((e) => !isStale(e.lastFrameAtMs, nowMs));
  return fresh ? "live" : "stale";
}

export function describeMode(mode: Record<string, unknown> | null): string {
  if (!mode || typeof mode["type"] !== "string") {
    return "unknown";
  }
  switch (mode["type"]) {
    case "idle":
      return "Idle";
    case "active":
      return `Active ${mode["id"] ?? "?"}` +
        (mode["level"] !== undefined ? ` (level ${mode["level"]})` : "");
    case "ocular":
      return mode["angle"] !== undefined
        ? `Ocular gaze ${mode["angle"]} deg`
        : `Ocular ${mode["id"] ?? "?"}`;
    case "functional":
      return `Functional ${mode["color"]} @ ${mode["intensity"]}`;
    default:
      return String(mode["type"]);
  }
}

export function startSequence(
  state: ConsoleViewState,
  order: string[],
  dwellMs: number,
  atMs: number,
): ConsoleViewState {
  return { ...state, sequence: { order: [...order], dwellMs, startedAtMs: atMs } };
}

export function sequenceOrderText(run: SequenceRun): string {
  return run.order.join(" → ");
}

export interface SequenceProgress {
  position: number;
  total: number;
  done: boolean;
  currentId: string | null;
}

/** Where a trial run stands, judged by dwell time alone. */
export function sequenceProgress(run: SequenceRun, nowMs: number): SequenceProgress {
  const total = run.order.length;
  const elapsed = Math.max(0, nowMs - run.startedAtMs);
  const position = Math.min(total, Math.floor(elapsed / run.dwellMs));
  const done = position >= total;
  return {
    position,
    total,
    done,
    currentId: done ? null : run.order[position] ?? null,
  };
}

export function setError(
  state: ConsoleViewState,
  message: string | null,
): ConsoleViewState {
  return { ...state, lastError: message };
}
