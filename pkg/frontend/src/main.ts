/** Page wiring: one stream subscription, one canvas, one state object. */

import { PANEL_SIZE, quantizeGaze } from "./geometry.js";
import {
  ApiError,
  getCatalog,
  getState,
  openFrameStream,
  postMode,
  postSequence,
} from "./api.js";
import {
  applyFrame,
  connectionLabel,
  describeMode,
  discOps,
  initialState,
  sequenceOrderText,
  sequenceProgress,
  setError,
  startSequence,
  type ConsoleViewState,
  type Rgba,
} from "./view.js";

let state: ConsoleViewState = initialState();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const canvas = el<HTMLCanvasElement>("eyes");
const ctx = canvas.getContext("2d")!;

function draw(): void {
  ctx.fillStyle = "#000";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  state.eyes.forEach((eye, panel) => {
    for (const op of discOps(eye.pixels, panel)) {
      ctx.beginPath();
      ctx.fillStyle = `rgb(${op.rgb[0]}, ${op.rgb[1]}, ${op.rgb[2]})`;
      ctx.arc(op.x, op.y, op.radius, 0, 2 * Math.PI);
      ctx.fill();
    }
  });
}

function showError(err: unknown): void {
  const text =
    err instanceof ApiError
      ? `server: ${err.message}`
      : err instanceof Error
        ? err.message
        : String(err);
  state = setError(state, text);
  el("error").textContent = text;
}

function clearError(): void {
  state = setError(state, null);
  el("error").textContent = "";
}

function refreshStatusLine(): void {
  const label = connectionLabel(state, Date.now());
  const badge = el("stale-badge");
  badge.hidden = label === "live";
  el("mode-line").textContent = describeMode(state.mode);
}

function refreshSequencePanel(): void {
  const run = state.sequence;
  const orderBox = el("sequence-order");
  const progressBox = el("sequence-progress");
  if (!run) {
    orderBox.textContent = "";
    progressBox.textContent = "";
    return;
  }
  orderBox.textContent = sequenceOrderText(run);
  const p = sequenceProgress(run, Date.now());
  progressBox.textContent = p.done
    ? `finished all ${p.total}`
    : `${p.position + 1} / ${p.total}: ${p.currentId}`;
}

async function send(mode: Record<string, unknown>): Promise<void> {
  try {
    await postMode(mode);
    clearError();
  } catch (err) {
    showError(err);
  }
}

function buildCatalogButtons(): void {
  const catalog = state.catalog;
  if (!catalog) {
    return;
  }
  const activeBox = el("active-buttons");
  activeBox.replaceChildren();
  for (const entry of catalog.active) {
    const button = document.createElement("button");
    button.textContent = entry.id;
    button.title = entry.gloss;
    if (entry.id === "BatteryLevel") {
      button.addEventListener("click", () => {
        const level = Number(el<HTMLInputElement>("battery-level").value);
        void send({ type: "active", id: entry.id, level });
      });
    } else {
      button.addEventListener("click", () =>
        void send({ type: "active", id: entry.id }),
      );
    }
    activeBox.appendChild(button);
  }
  const ocularBox = el("ocular-buttons");
  ocularBox.replaceChildren();
  for (const entry of catalog.ocular) {
    if (entry.id === "Gaze") {
      continue; // the dial owns gaze
    }
    const button = document.createElement("button");
    button.textContent = entry.id;
    button.title = entry.gloss;
    button.addEventListener("click", () =>
      void send({ type: "ocular", id: entry.id }),
    );
    ocularBox.appendChild(button);
  }
}

function wireControls(): void {
  const dial = el<HTMLInputElement>("gaze-dial");
  const dialValue = el("gaze-value");
  const updateDialLabel = () => {
    dialValue.textContent = `${quantizeGaze(Number(dial.value))} deg`;
  };
  dial.addEventListener("input", updateDialLabel);
  dial.addEventListener("change", () => {
    // only grid angles ever leave the page
    void send({ type: "ocular", angle: quantizeGaze(Number(dial.value)) });
  });
  updateDialLabel();

  const intensity = el<HTMLInputElement>("intensity");
  const intensityValue = el("intensity-value");
  const updateIntensityLabel = () => {
    intensityValue.textContent = Number(intensity.value).toFixed(2);
  };
  intensity.addEventListener("input", updateIntensityLabel);
  intensity.addEventListener("change", () => {
    void send({
      type: "functional",
      color: el<HTMLSelectElement>("light-color").value,
      intensity: Number(intensity.value),
    });
  });
  updateIntensityLabel();

  el("idle-button").addEventListener("click", () => void send({ type: "idle" }));

  el<HTMLFormElement>("sequence-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const dwell = Number(el<HTMLInputElement>("dwell").value);
    const seedRaw = el<HTMLInputElement>("seed").value.trim();
    const randomize = el<HTMLInputElement>("randomize").checked;
    void (async () => {
      try {
        const reply = await postSequence({
          dwell_ms: dwell,
          randomize,
          ...(seedRaw === "" ? {} : { seed: Number(seedRaw) }),
        });
        state = startSequence(state, reply.order, reply.dwell_ms, Date.now());
        clearError();
        refreshSequencePanel();
      } catch (err) {
        showError(err);
      }
    })();
  });
}

async function pollState(): Promise<void> {
  try {
    const reply = await getState();
    state = { ...state, mode: reply.mode };
    // polling fallback: only overwrite pixels when the stream is quiet
    if (connectionLabel(state, Date.now()) === "stale") {
      for (const eyeId of [0, 1] as const) {
        const eye = reply.eyes[String(eyeId)];
        if (eye) {
          state = applyFrame(state, eyeId, eye.pixels, eye.sequence, Date.now());
        }
      }
      draw();
    }
  } catch {
    // leave the stale badge to say it
  }
}

async function start(): Promise<void> {
  try {
    state = { ...state, catalog: await getCatalog() };
    buildCatalogButtons();
  } catch (err) {
    showError(err);
  }
  wireControls();
  openFrameStream(
    (frame) => {
      state = applyFrame(
        state,
        frame.eye_id,
        frame.pixels as Rgba[],
        frame.sequence,
        Date.now(),
      );
      draw();
    },
    () => {
      // the stale badge appears via the status timer within a second
    },
  );
  void pollState();
  setInterval(() => {
    refreshStatusLine();
    refreshSequencePanel();
  }, 250);
  setInterval(() => void pollState(), 2000);
  draw();
}

canvas.width = 2 * PANEL_SIZE;
canvas.height = PANEL_SIZE;
void start();
