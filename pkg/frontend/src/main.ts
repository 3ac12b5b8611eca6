// Application wiring for the two-tab UI: "Extract Edges" (segmentation
// tuning + processing) and "Analysis" (plots, fits, exports). All numbers
// shown in the fit table come verbatim from the service payload.

import { ApiClient, type AnalyzeResponse, type EdgesFile, type MetaJson, type PreviewRequest, type PreviewResponse, type SegmentationJson } from "./api.js";
import { formatHover } from "./color.js";
import { downloadCanvasPng, downloadText, fitsCsv, seriesCsv } from "./csv.js";
import { FIT_TABLE_HEADER, fitTableRows } from "./fitTable.js";
import { LinePlot, PALETTE, type Series } from "./plot.js";
import { PreviewScheduler } from "./preview.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const api = new ApiClient("");
const statusEl = $<HTMLSpanElement>("status");

function setStatus(msg: string, error = false): void {
  statusEl.textContent = msg;
  statusEl.style.color = error ? "#ff9f9f" : "#9fd49f";
}

// ---------------------------------------------------------------------------
// state
// ---------------------------------------------------------------------------

type SliderGroup = { h: [HTMLInputElement, HTMLInputElement]; s: [HTMLInputElement, HTMLInputElement]; v: [HTMLInputElement, HTMLInputElement] };

const state = {
  frameCount: 0,
  fps: 30,
  width: 0,
  height: 0,
  currentFrame: 0,
  roi: null as [number, number, number, number] | null,
  trace: null as { frame_indices: number[]; values: number[] } | null,
  results: null as EdgesFile | null,
  analysis: null as AnalyzeResponse | null,
  showFits: false,
  frameImage: null as HTMLImageElement | null,
  framePixels: null as ImageData | null,
  maskImage: null as HTMLImageElement | null,
  preview: null as PreviewResponse | null,
  roiDrag: null as { x0: number; y0: number; x1: number; y1: number } | null,
};

// ---------------------------------------------------------------------------
// segmentation controls (six wrap-aware range sliders)
// ---------------------------------------------------------------------------

const SAMPLE_DEFAULTS = { h: [330, 70], s: [0, 1], v: [0.6, 1] };
const SHOCK_DEFAULTS = { h: [240, 330], s: [0.1, 1], v: [0.35, 1] };

function buildSliderGroup(host: HTMLElement, defaults: { h: number[]; s: number[]; v: number[] }): SliderGroup {
  const make = (label: string, min: number, max: number, step: number, lo: number, hi: number): [HTMLInputElement, HTMLInputElement] => {
    const name = document.createElement("span");
    name.textContent = label;
    const a = document.createElement("input");
    const b = document.createElement("input");
    for (const [el, val] of [[a, lo], [b, hi]] as const) {
      el.type = "range";
      el.min = String(min);
      el.max = String(max);
      el.step = String(step);
      el.value = String(val);
    }
    const value = document.createElement("span");
    value.className = "value";
    const update = (): void => {
      value.textContent = `${a.value} .. ${b.value}`;
    };
    a.addEventListener("input", update);
    b.addEventListener("input", update);
    update();
    host.append(name, a, b, value);
    return [a, b];
  };
  return {
    h: make("H", 0, 359.9, 0.1, defaults.h[0], defaults.h[1]),
    s: make("S", 0, 1, 0.01, defaults.s[0], defaults.s[1]),
    v: make("V", 0, 1, 0.01, defaults.v[0], defaults.v[1]),
  };
}

const sampleSliders = buildSliderGroup($("sample-sliders"), SAMPLE_DEFAULTS);
const shockSliders = buildSliderGroup($("shock-sliders"), SHOCK_DEFAULTS);
const methodSel = $<HTMLSelectElement>("method");
const flowSel = $<HTMLSelectElement>("flow");
const grayThreshold = $<HTMLInputElement>("gray-threshold");

function groupRange(g: SliderGroup): [number, number, number, number, number, number] {
  return [
    Number(g.h[0].value),
    Number(g.h[1].value),
    Number(g.s[0].value),
    Number(g.s[1].value),
    Number(g.v[0].value),
    Number(g.v[1].value),
  ];
}

function currentSegmentation(): SegmentationJson {
  return {
    method: methodSel.value as SegmentationJson["method"],
    sample_ranges: [groupRange(sampleSliders)],
    shock_ranges: [groupRange(shockSliders)],
    gray_threshold: Number(grayThreshold.value),
    plugin: null,
  };
}

function syncMethodControls(): void {
  $("hsv-controls").classList.toggle("hidden", methodSel.value === "gray");
  $("gray-controls").classList.toggle("hidden", methodSel.value !== "gray");
  const manual = methodSel.value === "hsv";
  for (const g of [sampleSliders, shockSliders]) {
    for (const pair of [g.h, g.s, g.v]) {
      pair[0].disabled = !manual;
      pair[1].disabled = !manual;
    }
  }
}

// ---------------------------------------------------------------------------
// frame canvas: image + mask overlay + edges + ROI drag + hover readout
// ---------------------------------------------------------------------------

const frameCanvas = $<HTMLCanvasElement>("frame-canvas");
const frameCtx = frameCanvas.getContext("2d")!;
const hoverEl = $<HTMLDivElement>("hover-readout");

function drawFrame(): void {
  if (!state.frameImage) return;
  frameCanvas.width = state.width;
  frameCanvas.height = state.height;
  frameCtx.drawImage(state.frameImage, 0, 0);
  if (state.maskImage) frameCtx.drawImage(state.maskImage, ...maskOrigin());
  const preview = state.preview;
  if (preview) {
    drawPolyline(preview.sample_edge, "#ff2020");
    if (preview.shock_edge) drawPolyline(preview.shock_edge, "#b266ff");
  }
  const roi = state.roiDrag
    ? ([
        Math.min(state.roiDrag.x0, state.roiDrag.x1),
        Math.min(state.roiDrag.y0, state.roiDrag.y1),
        Math.abs(state.roiDrag.x1 - state.roiDrag.x0),
        Math.abs(state.roiDrag.y1 - state.roiDrag.y0),
      ] as [number, number, number, number])
    : state.roi;
  if (roi) {
    frameCtx.strokeStyle = "#00e5ff";
    frameCtx.lineWidth = 2;
    frameCtx.strokeRect(roi[0], roi[1], roi[2], roi[3]);
    frameCtx.lineWidth = 1;
  }
}

function maskOrigin(): [number, number] {
  const roi = state.preview?.roi;
  return roi ? [roi[0], roi[1]] : [0, 0];
}

function drawPolyline(points: [number, number][], color: string): void {
  if (points.length === 0) return;
  frameCtx.strokeStyle = color;
  frameCtx.lineWidth = 1.5;
  frameCtx.beginPath();
  frameCtx.moveTo(points[0][0], points[0][1]);
  for (const [x, y] of points) frameCtx.lineTo(x, y);
  frameCtx.stroke();
  frameCtx.lineWidth = 1;
}

function canvasPos(ev: MouseEvent): [number, number] {
  const rect = frameCanvas.getBoundingClientRect();
  const x = Math.round(((ev.clientX - rect.left) / rect.width) * frameCanvas.width);
  const y = Math.round(((ev.clientY - rect.top) / rect.height) * frameCanvas.height);
  return [Math.max(0, Math.min(frameCanvas.width - 1, x)), Math.max(0, Math.min(frameCanvas.height - 1, y))];
}

frameCanvas.addEventListener("mousemove", (ev) => {
  const [x, y] = canvasPos(ev);
  if (state.roiDrag) {
    state.roiDrag.x1 = x;
    state.roiDrag.y1 = y;
    drawFrame();
  }
  // hover readout straight from the displayed frame pixels
  if (state.framePixels) {
    const i = (y * state.width + x) * 4;
    const d = state.framePixels.data;
    hoverEl.textContent = formatHover(x, y, d[i], d[i + 1], d[i + 2]);
  }
});

frameCanvas.addEventListener("mousedown", (ev) => {
  const [x, y] = canvasPos(ev);
  state.roiDrag = { x0: x, y0: y, x1: x, y1: y };
});

window.addEventListener("mouseup", () => {
  if (!state.roiDrag) return;
  const { x0, y0, x1, y1 } = state.roiDrag;
  state.roiDrag = null;
  const w = Math.abs(x1 - x0);
  const h = Math.abs(y1 - y0);
  if (w >= 4 && h >= 4) {
    state.roi = [Math.min(x0, x1), Math.min(y0, y1), w, h];
    schedulePreview(true);
  }
  drawFrame();
});

$("clear-roi").addEventListener("click", () => {
  state.roi = null;
  schedulePreview(true);
});

async function loadFrameImage(index: number): Promise<void> {
  const img = new Image();
  img.src = api.frameUrl(index) + `?s=${Date.now() % 1e6}`;
  await img.decode();
  state.frameImage = img;
  const off = document.createElement("canvas");
  off.width = state.width;
  off.height = state.height;
  const ctx = off.getContext("2d")!;
  ctx.drawImage(img, 0, 0);
  state.framePixels = ctx.getImageData(0, 0, state.width, state.height);
  drawFrame();
}

// ---------------------------------------------------------------------------
// live preview plumbing
// ---------------------------------------------------------------------------

const previews = new PreviewScheduler<PreviewRequest, PreviewResponse>(
  (req) => api.preview(req),
  (res) => {
    state.preview = res;
    const img = new Image();
    img.onload = () => {
      state.maskImage = img;
      drawFrame();
    };
    img.src = `data:image/png;base64,${res.mask_png_base64}`;
    setStatus(`preview frame ${res.frame_index}`);
  },
  (err) => setStatus(`preview failed: ${err}`, true),
);

function schedulePreview(immediate = false): void {
  if (state.frameCount === 0) return;
  const req: PreviewRequest = {
    frame_index: state.currentFrame,
    segmentation: currentSegmentation(),
    roi: state.roi,
    flow: flowSel.value as "left" | "right",
  };
  if (immediate) previews.updateNow(req);
  else previews.update(req);
}

for (const g of [sampleSliders, shockSliders]) {
  for (const pair of [g.h, g.s, g.v]) {
    pair[0].addEventListener("input", () => schedulePreview());
    pair[1].addEventListener("input", () => schedulePreview());
  }
}
grayThreshold.addEventListener("input", () => {
  $("gray-threshold-label").textContent = grayThreshold.value;
  schedulePreview();
});
methodSel.addEventListener("change", () => {
  syncMethodControls();
  schedulePreview(true);
});
flowSel.addEventListener("change", () => schedulePreview(true));

const frameSlider = $<HTMLInputElement>("frame-slider");
frameSlider.addEventListener("input", () => {
  state.currentFrame = Number(frameSlider.value);
  $("frame-label").textContent = frameSlider.value;
  void loadFrameImage(state.currentFrame);
  schedulePreview(true);
});

// ---------------------------------------------------------------------------
// brightness trace with draggable window handles
// ---------------------------------------------------------------------------

const traceCanvas = $<HTMLCanvasElement>("trace-canvas");
const tracePlot = new LinePlot(traceCanvas);
const firstInput = $<HTMLInputElement>("first-frame");
const lastInput = $<HTMLInputElement>("last-frame");
let dragging: "first" | "last" | null = null;

function drawTrace(): void {
  if (!state.trace) return;
  tracePlot.draw(
    [{ color: PALETTE[0], x: state.trace.frame_indices, y: state.trace.values, marker: true }],
    { xLabel: "frame", yLabel: "brightness", legend: false },
  );
  tracePlot.drawVLine(Number(firstInput.value), "#2ca02c");
  tracePlot.drawVLine(Number(lastInput.value), "#d62728");
}

traceCanvas.addEventListener("mousedown", (ev) => {
  if (!state.trace) return;
  const rect = traceCanvas.getBoundingClientRect();
  const px = ((ev.clientX - rect.left) / rect.width) * traceCanvas.width;
  const dFirst = Math.abs(px - tracePlot.px(Number(firstInput.value)));
  const dLast = Math.abs(px - tracePlot.px(Number(lastInput.value)));
  if (Math.min(dFirst, dLast) > 10) return;
  dragging = dFirst <= dLast ? "first" : "last";
});

traceCanvas.addEventListener("mousemove", (ev) => {
  if (!dragging || !state.trace) return;
  const rect = traceCanvas.getBoundingClientRect();
  const px = ((ev.clientX - rect.left) / rect.width) * traceCanvas.width;
  const frame = Math.round(Math.max(0, Math.min(state.frameCount - 1, tracePlot.xAt(px))));
  (dragging === "first" ? firstInput : lastInput).value = String(frame);
  drawTrace();
});

window.addEventListener("mouseup", () => {
  dragging = null;
});

// ---------------------------------------------------------------------------
// source loading and processing
// ---------------------------------------------------------------------------

function metaFromUi(source: string): MetaJson {
  return {
    schema: "arcjetcv-meta/1",
    source,
    first_frame: Number(firstInput.value),
    last_frame: Number(lastInput.value),
    frame_stride: Number($<HTMLInputElement>("stride").value),
    roi: state.roi,
    flow: flowSel.value as "left" | "right",
    segmentation: currentSegmentation(),
  };
}

function applyMeta(meta: MetaJson): void {
  firstInput.value = String(meta.first_frame);
  lastInput.value = String(meta.last_frame);
  $<HTMLInputElement>("stride").value = String(meta.frame_stride);
  flowSel.value = meta.flow;
  methodSel.value = meta.segmentation.method;
  state.roi = meta.roi;
  const flags = meta.flags as Record<string, string> | undefined;
  $("flags").textContent =
    flags && Object.keys(flags).length ? `needs manual input: ${Object.keys(flags).join(", ")}` : "";
  syncMethodControls();
}

async function afterSourceOpened(): Promise<void> {
  const info = await api.info();
  if (!info.source) return;
  state.frameCount = info.source.frame_count;
  state.fps = info.source.fps;
  state.width = info.source.width;
  state.height = info.source.height;
  frameSlider.max = String(state.frameCount - 1);
  lastInput.max = firstInput.max = String(state.frameCount - 1);
  state.trace = await api.brightness();
  drawTrace();
  state.currentFrame = Math.min(state.currentFrame, state.frameCount - 1);
  await loadFrameImage(state.currentFrame);
  schedulePreview(true);
}

$("autoconfig").addEventListener("click", () => {
  const source = $<HTMLInputElement>("source-path").value.trim();
  const model = $<HTMLInputElement>("model-path").value.trim();
  if (!source) {
    setStatus("enter a manifest path first", true);
    return;
  }
  setStatus("auto-configuring...");
  api
    .autoconfig(source, model || undefined)
    .then(async (meta) => {
      applyMeta(meta);
      await afterSourceOpened();
      drawTrace();
      setStatus("auto-configured");
    })
    .catch((err) => setStatus(String(err), true));
});

$("load-meta").addEventListener("click", () => {
  const source = $<HTMLInputElement>("source-path").value.trim();
  if (!source) {
    setStatus("enter a manifest path first", true);
    return;
  }
  const meta = metaFromUi(source);
  meta.first_frame = 0;
  meta.last_frame = 0;
  meta.frame_stride = 1;
  api
    .putMeta(meta)
    .then(async () => {
      await afterSourceOpened();
      firstInput.value = "0";
      lastInput.value = String(state.frameCount - 1);
      drawTrace();
      setStatus("source opened");
    })
    .catch((err) => setStatus(String(err), true));
});

const progressBar = $<HTMLProgressElement>("progress");
const progressLabel = $<HTMLSpanElement>("progress-label");

$("process-all").addEventListener("click", async () => {
  const source = $<HTMLInputElement>("source-path").value.trim();
  if (!source || state.frameCount === 0) {
    setStatus("open a source first", true);
    return;
  }
  try {
    await api.putMeta(metaFromUi(source));
    await api.startProcess();
    setStatus("processing...");
    const poll = window.setInterval(async () => {
      const p = await api.progress();
      progressBar.max = Math.max(1, p.total);
      progressBar.value = p.done;
      progressLabel.textContent = p.total ? `${p.done}/${p.total}` : "";
      if (p.state === "done" || p.state === "error") {
        window.clearInterval(poll);
        if (p.state === "error") {
          setStatus(p.error ?? "processing failed", true);
          return;
        }
        state.results = await api.results();
        showFrameErrors(state.results);
        setStatus(`processed ${state.results.frames.length} frames, ${state.results.rejected_frames.length} rejected`);
      }
    }, 300);
  } catch (err) {
    setStatus(String(err), true);
  }
});

function showFrameErrors(results: EdgesFile): void {
  const list = $<HTMLUListElement>("frame-errors");
  list.textContent = "";
  let count = 0;
  for (const frame of results.frames) {
    if (!frame.rejected) continue;
    count += 1;
    const li = document.createElement("li");
    li.textContent = `frame ${frame.index}: ${frame.reason ?? "rejected by outlier filter"}`;
    list.appendChild(li);
  }
  $("error-count").textContent = String(count);
}

// ---------------------------------------------------------------------------
// analysis view
// ---------------------------------------------------------------------------

const xyPlot = new LinePlot($<HTMLCanvasElement>("xy-canvas"));
const txPlot = new LinePlot($<HTMLCanvasElement>("tx-canvas"));
const txChannel = $<HTMLSelectElement>("tx-channel");

function keptFrames(results: EdgesFile) {
  return results.frames.filter((f) => !f.rejected && f.sample_edge.length > 0);
}

function drawXy(): void {
  if (!state.results) return;
  const kept = keptFrames(state.results);
  if (kept.length === 0) return;
  const want = Math.min(Number($<HTMLInputElement>("xy-subset").value), kept.length);
  $("xy-subset-label").textContent = String(want);
  const step = (kept.length - 1) / Math.max(1, want - 1);
  const series: Series[] = [];
  for (let i = 0; i < want; i++) {
    const frame = kept[Math.round(i * step)];
    const hue = 220 - (220 * i) / Math.max(1, want - 1); // blue -> red over time
    const pts = frame.sample_edge;
    series.push({
      label: i === 0 || i === want - 1 ? `t=${frame.time_s.toFixed(2)}s` : undefined,
      color: `hsl(${hue}, 70%, 45%)`,
      x: pts.map((p) => p[0]),
      y: pts.map((p) => p[1]),
    });
    if (frame.shock_edge) {
      series.push({
        color: `hsla(${hue}, 70%, 45%, 0.35)`,
        x: frame.shock_edge.map((p) => p[0]),
        y: frame.shock_edge.map((p) => p[1]),
        dashed: true,
      });
    }
  }
  xyPlot.draw(series, { xLabel: "x [px]", yLabel: "y [px]", title: "edge traces", invertY: true });
}

function drawTx(): void {
  if (!state.analysis) return;
  const name = txChannel.value;
  const channel = state.analysis.series.channels[name];
  if (!channel) return;
  const t = state.analysis.series.time_s;
  const series: Series[] = [{ label: name, color: PALETTE[0], x: t, y: channel, marker: true, line: false }];
  const fit = state.analysis.fits[name];
  if (state.showFits && fit) {
    const ts = [Math.min(...t), Math.max(...t)];
    series.push({
      label: `fit: ${fit.slope.toPrecision(4)} /s`,
      color: PALETTE[3],
      x: ts,
      y: ts.map((x) => fit.slope * x + fit.intercept),
    });
  }
  txPlot.draw(series, { xLabel: "time [s]", yLabel: name, title: "time series" });
}

function renderFitTable(): void {
  const table = $<HTMLTableElement>("fit-table");
  if (!state.analysis || !state.showFits) {
    table.classList.add("hidden");
    return;
  }
  const thead = table.querySelector("thead")!;
  const tbody = table.querySelector("tbody")!;
  thead.textContent = "";
  tbody.textContent = "";
  const headRow = document.createElement("tr");
  for (const name of FIT_TABLE_HEADER) {
    const th = document.createElement("th");
    th.textContent = name;
    headRow.appendChild(th);
  }
  thead.appendChild(headRow);
  for (const row of fitTableRows(state.analysis.fits)) {
    const tr = document.createElement("tr");
    for (const cell of row) {
      const td = document.createElement("td");
      td.textContent = cell;
      tr.appendChild(td);
    }
    tbody.appendChild(tr);
  }
  table.classList.remove("hidden");
}

$("plot-data").addEventListener("click", async () => {
  if (!state.results) {
    setStatus("process a video first", true);
    return;
  }
  try {
    const diaMm = Number($<HTMLInputElement>("diameter-mm").value);
    const diaPxRaw = $<HTMLInputElement>("diameter-px").value;
    state.analysis = await api.analyze(diaMm, diaPxRaw ? Number(diaPxRaw) : undefined);
    txChannel.textContent = "";
    for (const name of Object.keys(state.analysis.series.channels)) {
      const opt = document.createElement("option");
      opt.value = name;
      opt.textContent = name;
      txChannel.appendChild(opt);
    }
    drawXy();
    drawTx();
    renderFitTable();
    setStatus("analysis ready");
  } catch (err) {
    setStatus(String(err), true);
  }
});

$("fit-data").addEventListener("click", () => {
  state.showFits = !state.showFits;
  drawTx();
  renderFitTable();
});

txChannel.addEventListener("change", drawTx);
$("xy-subset").addEventListener("input", drawXy);
$("export-xy").addEventListener("click", () => downloadCanvasPng("edges_xy.png", $<HTMLCanvasElement>("xy-canvas")));
$("export-tx").addEventListener("click", () => downloadCanvasPng("timeseries_tx.png", $<HTMLCanvasElement>("tx-canvas")));
$("export-series").addEventListener("click", () => {
  if (state.analysis) downloadText("series.csv", seriesCsv(state.analysis.series));
});
$("export-fits").addEventListener("click", () => {
  if (state.analysis) downloadText("fits.csv", fitsCsv(state.analysis.fits));
});

// ---------------------------------------------------------------------------
// tabs + init
// ---------------------------------------------------------------------------

function selectTab(which: "process" | "analysis"): void {
  $("tab-process").classList.toggle("active", which === "process");
  $("tab-analysis").classList.toggle("active", which === "analysis");
  $("view-process").classList.toggle("hidden", which !== "process");
  $("view-analysis").classList.toggle("hidden", which !== "analysis");
  if (which === "analysis") {
    drawXy();
    drawTx();
  }
}

$("tab-process").addEventListener("click", () => selectTab("process"));
$("tab-analysis").addEventListener("click", () => selectTab("analysis"));

syncMethodControls();
api
  .info()
  .then((info) => {
    setStatus(`service ${info.version}`);
    if (info.source) {
      $<HTMLInputElement>("source-path").value = info.source.manifest;
      return afterSourceOpened();
    }
    return undefined;
  })
  .catch(() => setStatus("service unreachable", true));
