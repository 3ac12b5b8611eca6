// Typed client for the processing service. All calls go through fetch;
// the UI never recomputes anything the service already reports.

export type HsvRangeJson = [number, number, number, number, number, number];

export type SegmentationJson = {
  method: "auto-hsv" | "hsv" | "gray" | "plugin";
  sample_ranges: HsvRangeJson[];
  shock_ranges: HsvRangeJson[];
  gray_threshold: number;
  plugin: string | null;
};

export type MetaJson = {
  schema: string;
  source: string;
  first_frame: number;
  last_frame: number;
  frame_stride: number;
  roi: [number, number, number, number] | null;
  flow: "left" | "right";
  segmentation: SegmentationJson;
  [key: string]: unknown;
};

export type PreviewRequest = {
  frame_index: number;
  segmentation?: SegmentationJson;
  roi?: [number, number, number, number] | null;
  flow?: "left" | "right";
};

export type PreviewResponse = {
  frame_index: number;
  roi: [number, number, number, number] | null;
  mask_png_base64: string;
  sample_edge: [number, number][];
  shock_edge: [number, number][] | null;
};

export type SourceInfo = {
  manifest: string;
  fps: number;
  frame_count: number;
  width: number;
  height: number;
};

export type InfoResponse = {
  version: string;
  session: string;
  source: SourceInfo | null;
  meta_set: boolean;
  busy: boolean;
};

export type BrightnessResponse = { frame_indices: number[]; values: number[] };

export type Progress = { state: "idle" | "running" | "done" | "error"; done: number; total: number; error: string | null };

export type EdgesFrame = {
  index: number;
  time_s: number;
  sample_edge: [number, number][];
  shock_edge: [number, number][] | null;
  rejected: boolean;
  reason?: string;
};

export type EdgesFile = {
  schema: string;
  meta: MetaJson;
  frames: EdgesFrame[];
  rejected_frames: number[];
};

export type FitJson = {
  slope: number;
  intercept: number;
  slope_stderr: number;
  intercept_stderr: number;
  r_squared: number;
  n_points: number;
};

export type AnalyzeResponse = {
  calibration: { model_diameter_mm: number; measured_diameter_px: number };
  series: {
    time_s: number[];
    frame_indices: number[];
    stations: number[];
    channels: Record<string, (number | null)[]>;
  };
  fits: Record<string, FitJson>;
};

export class ApiClient {
  constructor(
    private base: string = "",
    private sessionId: string = "default",
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await fetch(this.base + path, {
      method,
      headers: {
        "X-Session-Id": this.sessionId,
        ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
      },
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    if (!res.ok) {
      let detail = `${res.status}`;
      try {
        detail = JSON.stringify(await res.json());
      } catch {
        /* keep status */
      }
      throw new Error(`${method} ${path} failed: ${detail}`);
    }
    return (await res.json()) as T;
  }

  info(): Promise<InfoResponse> {
    return this.request("GET", "/api/info");
  }

  frameUrl(index: number): string {
    return `${this.base}/api/frame/${index}`;
  }

  brightness(): Promise<BrightnessResponse> {
    return this.request("GET", "/api/brightness");
  }

  autoconfig(source: string, model?: string): Promise<MetaJson> {
    return this.request("POST", "/api/autoconfig", { source, model: model ?? null });
  }

  getMeta(): Promise<MetaJson> {
    return this.request("GET", "/api/meta");
  }

  putMeta(meta: MetaJson): Promise<MetaJson> {
    return this.request("PUT", "/api/meta", meta);
  }

  preview(req: PreviewRequest): Promise<PreviewResponse> {
    return this.request("POST", "/api/preview", req);
  }

  startProcess(): Promise<{ started: boolean }> {
    return this.request("POST", "/api/process", {});
  }

  progress(): Promise<Progress> {
    return this.request("GET", "/api/progress");
  }

  results(): Promise<EdgesFile> {
    return this.request("GET", "/api/results");
  }

  analyze(diameterMm: number, diameterPx?: number, stations?: number[]): Promise<AnalyzeResponse> {
    return this.request("POST", "/api/analyze", {
      diameter_mm: diameterMm,
      diameter_px: diameterPx ?? null,
      stations: stations ?? null,
    });
  }
}
