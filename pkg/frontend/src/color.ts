// Client-side HSV conversion for the hover readout. Must agree with the
// service's hexcone convention: h in degrees [0, 360), achromatic h = 0.

export type Hsv = { h: number; s: number; v: number };

export function rgbToHsv(r: number, g: number, b: number): Hsv {
  const rn = r / 255;
  const gn = g / 255;
  const bn = b / 255;
  const max = Math.max(rn, gn, bn);
  const min = Math.min(rn, gn, bn);
  const c = max - min;
  const v = max;
  const s = max === 0 ? 0 : c / max;
  let h = 0;
  if (c !== 0) {
    if (max === rn) {
      h = 60 * (((gn - bn) / c) % 6);
      if (h < 0) h += 360;
    } else if (max === gn) {
      h = 60 * ((bn - rn) / c + 2);
    } else {
      h = 60 * ((rn - gn) / c + 4);
    }
  }
  if (h >= 360) h -= 360;
  return { h, s, v };
}

export function hsvToRgb(h: number, s: number, v: number): [number, number, number] {
  h = ((h % 360) + 360) % 360;
  const c = v * s;
  const x = c * (1 - Math.abs(((h / 60) % 2) - 1));
  const m = v - c;
  const sector = Math.floor(h / 60) % 6;
  const table: [number, number, number][] = [
    [c, x, 0],
    [x, c, 0],
    [0, c, x],
    [0, x, c],
    [x, 0, c],
    [c, 0, x],
  ];
  const [r1, g1, b1] = table[sector];
  return [Math.round((r1 + m) * 255), Math.round((g1 + m) * 255), Math.round((b1 + m) * 255)];
}

export function formatHover(x: number, y: number, r: number, g: number, b: number): string {
  const { h, s, v } = rgbToHsv(r, g, b);
  return `(${x}, ${y})  RGB ${r},${g},${b}  HSV ${h.toFixed(1)}°, ${s.toFixed(3)}, ${v.toFixed(3)}`;
}
