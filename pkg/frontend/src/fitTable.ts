// Fit-table rows rendered verbatim from the /api/analyze payload. The UI
// must not recompute or reformat fit numbers, so every cell is the plain
// String() of the payload value.

import type { FitJson } from "./api.js";

export const FIT_TABLE_HEADER = ["channel", "slope", "± stderr", "intercept", "± stderr", "r²", "n"] as const;

export function fitTableRows(fits: Record<string, FitJson>): string[][] {
  return Object.entries(fits).map(([channel, f]) => [
    channel,
    String(f.slope),
    String(f.slope_stderr),
    String(f.intercept),
    String(f.intercept_stderr),
    String(f.r_squared),
    String(f.n_points),
  ]);
}
