import { describe, expect, it } from "vitest";

import type { FitJson } from "../src/api";
import { FIT_TABLE_HEADER, fitTableRows } from "../src/fitTable";

const payload: Record<string, FitJson> = {
  "recession_mm@0": {
    slope: 2.3984862495471925,
    intercept: -1.7254232175905334,
    slope_stderr: 0.0022706302631679,
    intercept_stderr: 0.0040116711104031,
    r_squared: 0.9999515863030288,
    n_points: 56,
  },
  standoff_mm: {
    slope: 0.2414090429411977,
    intercept: 3.9576716733741813,
    slope_stderr: 0.004961,
    intercept_stderr: 0.008766,
    r_squared: 0.97766,
    n_points: 56,
  },
};

describe("fitTableRows", () => {
  it("renders every number byte-equal to the payload (no recomputation)", () => {
    const rows = fitTableRows(payload);
    expect(rows).toHaveLength(2);
    for (const [channel, slope, slopeErr, intercept, interceptErr, r2, n] of rows) {
      const fit = payload[channel];
      expect(slope).toBe(String(fit.slope));
      expect(slopeErr).toBe(String(fit.slope_stderr));
      expect(intercept).toBe(String(fit.intercept));
      expect(interceptErr).toBe(String(fit.intercept_stderr));
      expect(r2).toBe(String(fit.r_squared));
      expect(n).toBe(String(fit.n_points));
    }
  });

  it("keeps column order aligned with the header", () => {
    expect(FIT_TABLE_HEADER).toEqual(["channel", "slope", "± stderr", "intercept", "± stderr", "r²", "n"]);
  });
});
