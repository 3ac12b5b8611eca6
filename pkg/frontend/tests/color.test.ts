import { describe, expect, it } from "vitest";

import { formatHover, hsvToRgb, rgbToHsv } from "../src/color";

// Golden set generated from the service's reference conversion; the
// Python suite pins the identical table (tests/test_colorseg.py).
const GOLDEN: [number, number, number, number, number, number][] = [
  [0, 0, 0, 0.0, 0.0, 0.0],
  [255, 255, 255, 0.0, 0.0, 1.0],
  [128, 128, 128, 0.0, 0.0, 0.5019607843137255],
  [255, 0, 0, 0.0, 1.0, 1.0],
  [0, 255, 0, 120.0, 1.0, 1.0],
  [0, 0, 255, 240.0, 1.0, 1.0],
  [255, 255, 0, 60.0, 1.0, 1.0],
  [0, 255, 255, 180.0, 1.0, 1.0],
  [255, 0, 255, 300.0, 1.0, 1.0],
  [255, 128, 0, 30.11764705882353, 1.0, 1.0],
  [128, 0, 255, 270.11764705882354, 1.0, 1.0],
  [0, 128, 255, 209.88235294117646, 1.0, 1.0],
  [230, 178, 126, 29.999999999999993, 0.45217391304347826, 0.9019607843137255],
  [112, 64, 160, 270.0, 0.6, 0.6274509803921569],
  [12, 12, 12, 0.0, 0.0, 0.047058823529411764],
  [37, 25, 60, 260.57142857142856, 0.5833333333333334, 0.23529411764705882],
];

describe("rgbToHsv", () => {
  it("matches the service on the 16-color golden set", () => {
    for (const [r, g, b, h, s, v] of GOLDEN) {
      const got = rgbToHsv(r, g, b);
      expect(got.h).toBeCloseTo(h, 10);
      expect(got.s).toBeCloseTo(s, 10);
      expect(got.v).toBeCloseTo(v, 10);
    }
  });

  it("reports pure red as H=0 S=1 V=1", () => {
    expect(rgbToHsv(255, 0, 0)).toEqual({ h: 0, s: 1, v: 1 });
  });

  it("round-trips through hsvToRgb within one level", () => {
    let seed = 12345;
    const rand = () => ((seed = (seed * 1103515245 + 12345) & 0x7fffffff) % 256);
    for (let i = 0; i < 300; i++) {
      const [r, g, b] = [rand(), rand(), rand()];
      const { h, s, v } = rgbToHsv(r, g, b);
      const [rr, gg, bb] = hsvToRgb(h, s, v);
      expect(Math.max(Math.abs(rr - r), Math.abs(gg - g), Math.abs(bb - b))).toBeLessThanOrEqual(1);
    }
  });
});

describe("formatHover", () => {
  it("includes position, RGB and HSV", () => {
    const text = formatHover(10, 20, 255, 0, 0);
    expect(text).toContain("(10, 20)");
    expect(text).toContain("RGB 255,0,0");
    expect(text).toContain("HSV 0.0");
  });
});
