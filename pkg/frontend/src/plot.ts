// Minimal canvas line plots for the trace/XY/TX views. No plotting
// dependency: axes, ticks, polylines, markers and fit overlays are drawn
// by hand so the dist build stays a plain tsc output.

export type Series = {
  label?: string;
  color: string;
  x: number[];
  y: (number | null)[];
  marker?: boolean;
  line?: boolean;
  dashed?: boolean;
};

export type PlotOptions = {
  xLabel?: string;
  yLabel?: string;
  title?: string;
  invertY?: boolean;
  legend?: boolean;
};

const MARGIN = { left: 52, right: 12, top: 22, bottom: 34 };

function finiteRange(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (lo === Infinity) return [0, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  return [lo, hi];
}

function niceTicks(lo: number, hi: number, n = 5): number[] {
  const span = hi - lo;
  const step0 = span / Math.max(n, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= n + 1) ?? 10 * mag;
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= hi + 1e-12; v += step) ticks.push(v);
  return ticks;
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.001) return v.toExponential(1);
  return String(Math.round(v * 1000) / 1000);
}

export class LinePlot {
  private ctx: CanvasRenderingContext2D;
  private xr: [number, number] = [0, 1];
  private yr: [number, number] = [0, 1];
  private invertY = false;

  constructor(private canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("no 2d context");
    this.ctx = ctx;
  }

  /** data x -> pixel x (usable by callers for overlays / handle hit tests) */
  px(x: number): number {
    const w = this.canvas.width - MARGIN.left - MARGIN.right;
    return MARGIN.left + ((x - this.xr[0]) / (this.xr[1] - this.xr[0])) * w;
  }

  py(y: number): number {
    const h = this.canvas.height - MARGIN.top - MARGIN.bottom;
    const f = (y - this.yr[0]) / (this.yr[1] - this.yr[0]);
    return this.invertY ? MARGIN.top + f * h : MARGIN.top + (1 - f) * h;
  }

  xAt(pixelX: number): number {
    const w = this.canvas.width - MARGIN.left - MARGIN.right;
    return this.xr[0] + ((pixelX - MARGIN.left) / w) * (this.xr[1] - this.xr[0]);
  }

  draw(series: Series[], opts: PlotOptions = {}): void {
    const { ctx, canvas } = this;
    this.invertY = opts.invertY ?? false;
    ctx.fillStyle = "#ffffff";
    ctx.fillRect(0, 0, canvas.width, canvas.height);

    const xs = series.flatMap((s) => s.x);
    const ys = series.flatMap((s) => s.y.filter((v): v is number => v !== null && Number.isFinite(v)));
    this.xr = finiteRange(xs);
    this.yr = finiteRange(ys);
    // pad y a little so flat lines stay visible
    const pad = 0.05 * (this.yr[1] - this.yr[0]);
    this.yr = [this.yr[0] - pad, this.yr[1] + pad];

    ctx.strokeStyle = "#888";
    ctx.fillStyle = "#222";
    ctx.lineWidth = 1;
    ctx.font = "11px sans-serif";

    // axes + ticks + grid
    ctx.strokeRect(MARGIN.left, MARGIN.top, canvas.width - MARGIN.left - MARGIN.right, canvas.height - MARGIN.top - MARGIN.bottom);
    ctx.textAlign = "center";
    for (const t of niceTicks(this.xr[0], this.xr[1])) {
      const x = this.px(t);
      ctx.strokeStyle = "#eee";
      ctx.beginPath();
      ctx.moveTo(x, MARGIN.top);
      ctx.lineTo(x, canvas.height - MARGIN.bottom);
      ctx.stroke();
      ctx.fillText(fmtTick(t), x, canvas.height - MARGIN.bottom + 14);
    }
    ctx.textAlign = "right";
    for (const t of niceTicks(this.yr[0], this.yr[1])) {
      const y = this.py(t);
      ctx.strokeStyle = "#eee";
      ctx.beginPath();
      ctx.moveTo(MARGIN.left, y);
      ctx.lineTo(canvas.width - MARGIN.right, y);
      ctx.stroke();
      ctx.fillText(fmtTick(t), MARGIN.left - 4, y + 4);
    }

    // labels
    ctx.textAlign = "center";
    if (opts.xLabel) ctx.fillText(opts.xLabel, (MARGIN.left + canvas.width - MARGIN.right) / 2, canvas.height - 4);
    if (opts.title) ctx.fillText(opts.title, canvas.width / 2, 13);
    if (opts.yLabel) {
      ctx.save();
      ctx.translate(12, canvas.height / 2);
      ctx.rotate(-Math.PI / 2);
      ctx.fillText(opts.yLabel, 0, 0);
      ctx.restore();
    }

    // series
    for (const s of series) {
      ctx.strokeStyle = s.color;
      ctx.fillStyle = s.color;
      ctx.setLineDash(s.dashed ? [5, 4] : []);
      if (s.line !== false) {
        ctx.beginPath();
        let pen = false;
        for (let i = 0; i < s.x.length; i++) {
          const v = s.y[i];
          if (v === null || !Number.isFinite(v)) {
            pen = false;
            continue;
          }
          const x = this.px(s.x[i]);
          const y = this.py(v);
          if (pen) ctx.lineTo(x, y);
          else ctx.moveTo(x, y);
          pen = true;
        }
        ctx.stroke();
      }
      ctx.setLineDash([]);
      if (s.marker) {
        for (let i = 0; i < s.x.length; i++) {
          const v = s.y[i];
          if (v === null || !Number.isFinite(v)) continue;
          ctx.beginPath();
          ctx.arc(this.px(s.x[i]), this.py(v), 2, 0, 2 * Math.PI);
          ctx.fill();
        }
      }
    }

    // legend
    if (opts.legend !== false) {
      let ly = MARGIN.top + 6;
      ctx.textAlign = "left";
      for (const s of series) {
        if (!s.label) continue;
        ctx.fillStyle = s.color;
        ctx.fillRect(MARGIN.left + 6, ly - 6, 10, 3);
        ctx.fillStyle = "#222";
        ctx.fillText(s.label, MARGIN.left + 20, ly);
        ly += 14;
      }
    }
  }

  /** Vertical marker line (window handles on the brightness trace). */
  drawVLine(x: number, color: string): void {
    const { ctx, canvas } = this;
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(this.px(x), MARGIN.top);
    ctx.lineTo(this.px(x), canvas.height - MARGIN.bottom);
    ctx.stroke();
    ctx.lineWidth = 1;
  }
}

export const PALETTE = [
  "#1f77b4",
  "#ff7f0e",
  "#2ca02c",
  "#d62728",
  "#9467bd",
  "#8c564b",
  "#e377c2",
  "#7f7f7f",
  "#bcbd22",
  "#17becf",
];
