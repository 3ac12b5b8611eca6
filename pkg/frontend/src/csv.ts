// CSV building and browser download for the analysis exports.

export function buildCsv(header: string[], rows: (string | number | null)[][]): string {
  const cell = (v: string | number | null): string => {
    if (v === null || (typeof v === "number" && !Number.isFinite(v))) return "";
    return String(v);
  };
  const lines = [header.join(",")];
  for (const row of rows) lines.push(row.map(cell).join(","));
  return lines.join("\n") + "\n";
}

export function seriesCsv(series: {
  time_s: number[];
  channels: Record<string, (number | null)[]>;
}): string {
  const names = Object.keys(series.channels);
  const header = ["time_s", ...names];
  const rows: (string | number | null)[][] = series.time_s.map((t, i) => [
    t,
    ...names.map((n) => series.channels[n][i]),
  ]);
  return buildCsv(header, rows);
}

export function fitsCsv(fits: Record<string, { slope: number; slope_stderr: number; intercept: number; intercept_stderr: number; r_squared: number; n_points: number }>): string {
  const header = ["channel", "slope", "slope_stderr", "intercept", "intercept_stderr", "r_squared", "n_points"];
  const rows = Object.entries(fits).map(([name, f]) => [
    name,
    f.slope,
    f.slope_stderr,
    f.intercept,
    f.intercept_stderr,
    f.r_squared,
    f.n_points,
  ]);
  return buildCsv(header, rows);
}

export function downloadText(filename: string, content: string, mime = "text/csv;charset=utf-8"): void {
  const blob = new Blob([content], { type: mime });
  const url = URL.createObjectURL(blob);
  const link = document.createElement("a");
  link.href = url;
  link.download = filename;
  link.style.display = "none";
  document.body.appendChild(link);
  link.click();
  document.body.removeChild(link);
  URL.revokeObjectURL(url);
}

export function downloadCanvasPng(filename: string, canvas: HTMLCanvasElement): void {
  canvas.toBlob((blob) => {
    if (!blob) return;
    const url = URL.createObjectURL(blob);
    const link = document.createElement("a");
    link.href = url;
    link.download = filename;
    document.body.appendChild(link);
    link.click();
    document.body.removeChild(link);
    URL.revokeObjectURL(url);
  }, "image/png");
}
