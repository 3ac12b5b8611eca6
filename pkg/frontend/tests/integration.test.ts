// Live-service checks; they run only when a service with an open fixture
// is reachable:
//
//   ablatrack synth --out /tmp/fix && ablatrack serve --port 8080 &
//   ABLATRACK_SERVICE_URL=http://127.0.0.1:8080 \
//   ABLATRACK_FIXTURE_MANIFEST=/tmp/fix/manifest.json npm run test:live

import { describe, expect, it } from "vitest";

import { ApiClient, type MetaJson } from "../src/api";
import { fitTableRows } from "../src/fitTable";

const BASE = process.env.ABLATRACK_SERVICE_URL;
const MANIFEST = process.env.ABLATRACK_FIXTURE_MANIFEST;

const live = BASE && MANIFEST ? describe : describe.skip;

function fixtureMeta(): MetaJson {
  return {
    schema: "arcjetcv-meta/1",
    source: MANIFEST!,
    first_frame: 30,
    last_frame: 60,
    frame_stride: 5,
    roi: null,
    flow: "right",
    segmentation: {
      method: "hsv",
      sample_ranges: [[330, 70, 0, 1, 0.6, 1]],
      shock_ranges: [[240, 330, 0.1, 1, 0.35, 1]],
      gray_threshold: 128,
      plugin: null,
    },
  };
}

live("against a local service", () => {
  const api = new ApiClient(BASE!, `ui-test-${Date.now()}`);

  it("a slider change gets a fresh preview within 300 ms", async () => {
    await api.putMeta(fixtureMeta());
    await api.preview({ frame_index: 40 }); // warm-up (first request decodes the frame)

    const meta = fixtureMeta();
    meta.segmentation.sample_ranges = [[330, 70, 0, 1, 0.4, 1]]; // the "slider change"
    const t0 = performance.now();
    const preview = await api.preview({ frame_index: 40, segmentation: meta.segmentation, flow: "right" });
    const elapsed = performance.now() - t0;
    expect(preview.frame_index).toBe(40);
    expect(preview.sample_edge.length).toBeGreaterThan(0);
    expect(elapsed).toBeLessThan(300);
  });

  it("fit table rows are byte-equal to the /api/analyze payload", async () => {
    await api.putMeta(fixtureMeta());
    await api.startProcess();
    for (let i = 0; i < 200; i++) {
      const p = await api.progress();
      if (p.state === "done") break;
      if (p.state === "error") throw new Error(p.error ?? "processing failed");
      await new Promise((r) => setTimeout(r, 100));
    }
    const analysis = await api.analyze(25.4);
    const rows = fitTableRows(analysis.fits);
    expect(rows.length).toBeGreaterThan(0);
    for (const row of rows) {
      const fit = analysis.fits[row[0]];
      expect(row[1]).toBe(String(fit.slope));
      expect(row[2]).toBe(String(fit.slope_stderr));
      expect(row[5]).toBe(String(fit.r_squared));
    }
  });
});
