/**
 * Figure renderers. Strictly read-only over the CSV/JSON contracts: slope
 * annotations are copied from the fit sidecar, never recomputed.
 */

import { numericColumn, requireColumns, stringColumn, SchemaError, Table } from "./csv.js";
import { Fit, slopeAnnotation } from "./fit.js";
import { HEIGHT, MARGIN, WIDTH, linearScale, log10Scale, Svg } from "./svg.js";

export type FigureKind = "growth" | "region" | "sweep";

const PLOT = {
  left: MARGIN.left,
  right: WIDTH - MARGIN.right,
  top: MARGIN.top,
  bottom: HEIGHT - MARGIN.bottom,
};

/**
 * Semilog-x growth curve. Accepts the truncation-growth schema
 * (V, lhs, ...) or the angular schema (epsilon, value, stderr); for the
 * latter the x axis is 1/epsilon, so growth is left-to-right in both.
 */
export function renderGrowth(table: Table, fit: Fit | null): string {
  let xs: number[];
  let ys: number[];
  let xLabel: string;
  let yLabel: string;
  if (table.header.includes("V")) {
    requireColumns(table, ["V", "lhs"]);
    xs = numericColumn(table, "V");
    ys = numericColumn(table, "lhs");
    xLabel = "V (log scale)";
    yLabel = "truncated norm";
  } else {
    requireColumns(table, ["epsilon", "value", "stderr"]);
    xs = numericColumn(table, "epsilon").map((e) => 1 / e);
    ys = numericColumn(table, "value");
    xLabel = "1/epsilon (log scale)";
    yLabel = "angular integral";
  }
  const pairs = xs.map((x, i) => [x, ys[i]] as [number, number]);
  pairs.sort((a, b) => a[0] - b[0]);
  if (pairs.some(([x, y]) => !(x > 0) || Number.isNaN(y))) {
    throw new SchemaError("growth figure needs positive x values and numeric y values");
  }
  const sx = log10Scale(pairs[0][0], pairs[pairs.length - 1][0], PLOT.left, PLOT.right);
  const yLo = Math.min(...pairs.map((p) => p[1]));
  const yHi = Math.max(...pairs.map((p) => p[1]));
  const pad = 0.08 * (yHi - yLo || 1);
  const sy = linearScale(yLo - pad, yHi + pad, PLOT.bottom, PLOT.top);

  const svg = new Svg();
  svg.axes(sx, sy, xLabel, yLabel);
  svg.polyline(pairs.map(([x, y]) => [sx(x), sy(y)]));
  for (const [x, y] of pairs) svg.circle(sx(x), sy(y), 3, "#1f6fb2");
  if (fit !== null) {
    svg.text(PLOT.left + 12, PLOT.top + 18, `slope ${slopeAnnotation(fit)}`, {
      size: 15,
      fill: "#b2361f",
    });
    svg.text(PLOT.left + 12, PLOT.top + 36, `r^2 = ${Number(fit.rSquared.toPrecision(6))}`, {
      size: 11,
      fill: "#777",
    });
  }
  return svg.render();
}

const REGION_COLORS: Record<string, string> = {
  endpoint: "#b2361f",
  "admissible-nonendpoint": "#1f6fb2",
  inadmissible: "#bbbbbb",
  invalid: "#e8e8e8",
};

/** Admissibility map over the (1/p, 1/q) square. */
export function renderRegion(table: Table): string {
  requireColumns(table, ["one_over_p", "one_over_q", "status"]);
  const px = numericColumn(table, "one_over_p");
  const qy = numericColumn(table, "one_over_q");
  const status = stringColumn(table, "status");
  const sx = linearScale(0, Math.max(1, ...px), PLOT.left, PLOT.right);
  const sy = linearScale(0, Math.max(1, ...qy), PLOT.bottom, PLOT.top);

  const svg = new Svg();
  svg.axes(sx, sy, "1/p", "1/q");
  for (let i = 0; i < px.length; i++) {
    const color = REGION_COLORS[status[i]];
    if (color === undefined) {
      throw new SchemaError(`unknown status label '${status[i]}' in row ${i + 1}`);
    }
    svg.circle(sx(px[i]), sy(qy[i]), 4, color);
  }
  let y = PLOT.top + 16;
  for (const [label, color] of Object.entries(REGION_COLORS)) {
    svg.circle(PLOT.right - 150, y - 4, 4, color);
    svg.text(PLOT.right - 140, y, label, { size: 11 });
    y += 16;
  }
  return svg.render();
}

/** Worst-constant curve along the sigma schedule (endpoint at sigma = 1). */
export function renderSweep(table: Table): string {
  requireColumns(table, ["sigma", "q_sigma", "worst_constant"]);
  const sigma = numericColumn(table, "sigma");
  const consts = numericColumn(table, "worst_constant");
  const pairs = sigma.map((s, i) => [s, consts[i]] as [number, number]);
  pairs.sort((a, b) => a[0] - b[0]);
  const sx = linearScale(1, Math.max(...sigma), PLOT.left, PLOT.right);
  const hi = Math.max(...consts);
  const sy = linearScale(0, hi * 1.1, PLOT.bottom, PLOT.top);

  const svg = new Svg();
  svg.axes(sx, sy, "sigma", "worst constant");
  svg.polyline(pairs.map(([s, c]) => [sx(s), sy(c)]));
  for (const [s, c] of pairs) svg.circle(sx(s), sy(c), 3, "#1f6fb2");
  svg.line(sx(1), PLOT.top, sx(1), PLOT.bottom, "#b2361f", 1);
  svg.text(sx(1) + 6, PLOT.top + 14, "endpoint", { size: 11, fill: "#b2361f" });
  return svg.render();
}

export function render(kind: FigureKind, table: Table, fit: Fit | null): string {
  switch (kind) {
    case "growth":
      return renderGrowth(table, fit);
    case "region":
      return renderRegion(table);
    case "sweep":
      return renderSweep(table);
  }
}
