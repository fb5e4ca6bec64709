/**
 * Panel renderers.  Each draws into a rectangular region of the shared
 * SVG document and reads only the documented CSV schemas.
 */

import type { FitDotsPanel, Panel, PesPanel, PurityPanel } from "./figspec.js";
import {
  numericColumn,
  optionalNumericColumn,
  readTable,
  requireColumns,
} from "./csv.js";
import {
  linearScale,
  linearTicks,
  logScale,
  logTicks,
  Scale,
  SvgBuilder,
  tickLabel,
} from "./svg.js";

export interface Region {
  x: number;
  y: number;
  width: number;
  height: number;
}

const MARGIN = { top: 28, right: 14, bottom: 42, left: 54 };

const SERIES_COLORS = ["#1f4e9c", "#c03325", "#2e7d32", "#7b1fa2"];

interface Frame {
  xScale: Scale;
  yScale: Scale;
  plot: Region;
}

function drawFrame(
  svg: SvgBuilder,
  region: Region,
  xDomain: [number, number],
  yDomain: [number, number],
  labels: { title: string; xLabel: string; yLabel: string },
  logY = false,
): Frame {
  const plot: Region = {
    x: region.x + MARGIN.left,
    y: region.y + MARGIN.top,
    width: region.width - MARGIN.left - MARGIN.right,
    height: region.height - MARGIN.top - MARGIN.bottom,
  };
  const xScale = linearScale(xDomain, [plot.x, plot.x + plot.width]);
  const yScale = logY
    ? logScale(yDomain, [plot.y + plot.height, plot.y])
    : linearScale(yDomain, [plot.y + plot.height, plot.y]);

  svg.line(plot.x, plot.y + plot.height, plot.x + plot.width, plot.y + plot.height, "#000000");
  svg.line(plot.x, plot.y, plot.x, plot.y + plot.height, "#000000");

  for (const tick of linearTicks(xDomain)) {
    const px = xScale(tick);
    svg.line(px, plot.y + plot.height, px, plot.y + plot.height + 4, "#000000");
    svg.text(px, plot.y + plot.height + 16, tickLabel(tick), { anchor: "middle" });
  }
  const yTicks = logY ? logTicks(yDomain) : linearTicks(yDomain);
  for (const tick of yTicks) {
    const py = yScale(tick);
    svg.line(plot.x - 4, py, plot.x, py, "#000000");
    svg.text(plot.x - 7, py + 3.5, tickLabel(tick), { anchor: "end" });
  }

  if (labels.title) {
    svg.text(plot.x + plot.width / 2, region.y + 16, labels.title, {
      anchor: "middle",
      size: 13,
    });
  }
  svg.text(plot.x + plot.width / 2, region.y + region.height - 8, labels.xLabel, {
    anchor: "middle",
  });
  svg.text(region.x + 14, plot.y + plot.height / 2, labels.yLabel, {
    anchor: "middle",
    rotate: true,
  });
  return { xScale, yScale, plot };
}

function clipPoints(
  xs: number[],
  ys: number[],
  frame: Frame,
): [number, number][] {
  return xs.map((x, index) => [frame.xScale(x), frame.yScale(ys[index])]);
}

export function renderPurityPanel(
  svg: SvgBuilder,
  region: Region,
  panel: PurityPanel,
): void {
  const table = readTable(panel.csv);
  requireColumns(table, ["t", ...panel.series]);
  const t = numericColumn(table, "t");
  const xDomain: [number, number] = [Math.min(...t), Math.max(...t)];
  // purity lives in [0, 1] by construction; the axis always shows it
  const frame = drawFrame(svg, region, xDomain, [0, 1], {
    title: panel.title,
    xLabel: panel.xLabel,
    yLabel: panel.yLabel,
  });
  panel.series.forEach((name, index) => {
    const values = numericColumn(table, name);
    svg.polyline(
      clipPoints(t, values, frame),
      SERIES_COLORS[index % SERIES_COLORS.length],
    );
  });
}

export function renderFitDotsPanel(
  svg: SvgBuilder,
  region: Region,
  panel: FitDotsPanel,
): void {
  const table = readTable(panel.csv);
  requireColumns(table, ["U", "a1", "tau1", "a2", "tau2", "a3", "tau3"]);
  const U = numericColumn(table, "U");
  const terms: { u: number; amplitude: number; tau: number }[] = [];
  for (const slot of [1, 2, 3]) {
    const amplitudes = optionalNumericColumn(table, `a${slot}`);
    const taus = optionalNumericColumn(table, `tau${slot}`);
    amplitudes.forEach((amplitude, row) => {
      const tau = taus[row];
      if (amplitude === null || tau === null || amplitude === 0) return;
      terms.push({ u: U[row], amplitude, tau });
    });
  }
  if (terms.length === 0) {
    throw new Error(`${panel.csv}: no fitted terms to draw`);
  }
  const uMin = Math.min(...U);
  const uMax = Math.max(...U);
  const pad = uMin === uMax ? 1 : 0.06 * (uMax - uMin);
  const tauValues = terms.map((term) => term.tau);
  const yDomain: [number, number] = panel.logY
    ? [Math.min(...tauValues) / 1.5, Math.max(...tauValues) * 1.5]
    : [0, Math.max(...tauValues) * 1.1];
  const frame = drawFrame(
    svg,
    region,
    [uMin - pad, uMax + pad],
    yDomain,
    { title: panel.title, xLabel: panel.xLabel, yLabel: panel.yLabel },
    panel.logY,
  );
  for (const term of terms) {
    const radius = Math.sqrt((panel.areaScale * Math.abs(term.amplitude)) / Math.PI);
    svg.circle(
      frame.xScale(term.u),
      frame.yScale(term.tau),
      radius,
      term.amplitude > 0 ? panel.positiveColor : panel.negativeColor,
    );
  }
}

export function renderPesPanel(
  svg: SvgBuilder,
  region: Region,
  panel: PesPanel,
): void {
  const table = readTable(panel.csv);
  const energyColumns = ["e1", "e2", "e3", "e4"];
  requireColumns(table, ["x", ...energyColumns]);
  const x = numericColumn(table, "x");
  const series = energyColumns.map((name) => numericColumn(table, name));
  const flat = series.flat();
  const lo = Math.min(...flat);
  const hi = Math.max(...flat);
  const pad = 0.05 * (hi - lo || 1);
  const frame = drawFrame(
    svg,
    region,
    [Math.min(...x), Math.max(...x)],
    [lo - pad, hi + pad],
    { title: panel.title, xLabel: panel.xLabel, yLabel: panel.yLabel },
  );
  series.forEach((values, index) => {
    svg.polyline(clipPoints(x, values, frame), SERIES_COLORS[index]);
  });
}

export function renderPanel(svg: SvgBuilder, region: Region, panel: Panel): void {
  switch (panel.kind) {
    case "purity":
      renderPurityPanel(svg, region, panel);
      break;
    case "fitdots":
      renderFitDotsPanel(svg, region, panel);
      break;
    case "pes":
      renderPesPanel(svg, region, panel);
      break;
  }
}
