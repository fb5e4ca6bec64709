/**
 * Figure assembly: lay the panels out on a grid, render each from its
 * CSV source, and write the output image.  Rendering is a pure
 * function of (CSV content, spec); the SVG text is deterministic.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import type { FigureSpec } from "./figspec.js";
import { renderPanel, Region } from "./panels.js";
import { SvgBuilder } from "./svg.js";

export function renderToSvg(spec: FigureSpec): string {
  const columns = Math.min(spec.layout.columns, spec.panels.length);
  const rows = Math.ceil(spec.panels.length / columns);
  const svg = new SvgBuilder(columns * spec.panelWidth, rows * spec.panelHeight);
  spec.panels.forEach((panel, index) => {
    const region: Region = {
      x: (index % columns) * spec.panelWidth,
      y: Math.floor(index / columns) * spec.panelHeight,
      width: spec.panelWidth,
      height: spec.panelHeight,
    };
    renderPanel(svg, region, panel);
  });
  return svg.toString();
}

async function svgToPng(svgText: string): Promise<Buffer> {
  let resvg;
  try {
    resvg = await import("@resvg/resvg-js");
  } catch {
    throw new Error(
      "PNG output requires the optional @resvg/resvg-js package; " +
        "install it or request format: \"svg\"",
    );
  }
  const rendered = new resvg.Resvg(svgText).render();
  return Buffer.from(rendered.asPng());
}

export async function render(spec: FigureSpec): Promise<string> {
  const svgText = renderToSvg(spec);
  mkdirSync(dirname(spec.output.path), { recursive: true });
  if (spec.output.format === "png") {
    writeFileSync(spec.output.path, await svgToPng(svgText));
  } else {
    writeFileSync(spec.output.path, svgText);
  }
  return spec.output.path;
}
