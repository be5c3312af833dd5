/** Ring layout mirrored from the server so discs land where PPM exports do.
 *
 * Angles are Cartesian: 0 deg points right, they grow counter-clockwise,
 * and index 0 of either ring sits at 0 deg.  Screen y grows downward, so
 * the y term is flipped when projecting to pixels.
 */

export const OUTER_COUNT = 24;
export const INNER_COUNT = 16;
export const PANEL_SIZE = 256;
export const OUTER_RADIUS = 100;
export const INNER_RADIUS = 60;
export const DISC_RADIUS = 9;
export const GAZE_STEP_DEG = 30;

const CENTER = 128;

export type RingName = "outer" | "inner";

export const GAZE_ANGLES: readonly number[] = Array.from(
  { length: 360 / GAZE_STEP_DEG },
  (_, k) => k * GAZE_STEP_DEG,
);

export function ringCount(ring: RingName): number {
  return ring === "outer" ? OUTER_COUNT : INNER_COUNT;
}

export function ledAngle(ring: RingName, index: number): number {
  const n = ringCount(ring);
  if (!Number.isInteger(index) || index < 0 || index >= n) {
    throw new RangeError(`index ${index} outside 0..${n - 1} for ${ring} ring`);
  }
  return (360 / n) * index;
}

/** Pixel center of one LED disc, matching the device's PPM rasterizer. */
export function discCenter(
  ring: RingName,
  index: number,
  panel = 0,
): { x: number; y: number } {
  const radius = ring === "outer" ? OUTER_RADIUS : INNER_RADIUS;
  const rad = (ledAngle(ring, index) * Math.PI) / 180;
  return {
    x: panel * PANEL_SIZE + Math.round(CENTER + radius * Math.cos(rad)),
    y: Math.round(CENTER - radius * Math.sin(rad)),
  };
}

/**
 * Snap a free angle to the 30-degree gaze grid.
 *
 * Mirrors the server rule exactly: the midpoint between detents rounds
 * counter-clockwise (up), so 105 becomes 120 and 345 wraps to 0.
 */
export function quantizeGaze(deg: number): number {
  if (!Number.isFinite(deg)) {
    throw new RangeError(`gaze angle must be finite, got ${deg}`);
  }
  const norm = ((deg % 360) + 360) % 360;
  const k = Math.floor(norm / GAZE_STEP_DEG);
  const rem = norm - k * GAZE_STEP_DEG;
  const snapped = rem >= GAZE_STEP_DEG / 2 ? k + 1 : k;
  return (snapped * GAZE_STEP_DEG) % 360;
}
