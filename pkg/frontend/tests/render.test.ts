import { mkdtempSync, readFileSync, writeFileSync, existsSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { parseFigureSpec } from "../src/figspec.js";
import { readTable, requireColumns, numericColumn } from "../src/csv.js";
import { renderToSvg, render } from "../src/render.js";
import { main } from "../src/cli.js";

const FIXTURES = join(__dirname, "fixtures");
const GOLDEN = join(__dirname, "golden");

function fixtureSpec(panel: object, outPath: string) {
  return parseFigureSpec({
    panels: [panel],
    output: { path: outPath, format: "svg" },
  });
}

function checkGolden(name: string, svgText: string) {
  const goldenPath = join(GOLDEN, name);
  if (!existsSync(goldenPath)) {
    // first run records the reference; later runs must match it exactly
    writeFileSync(goldenPath, svgText);
  }
  expect(svgText).toBe(readFileSync(goldenPath, "utf8"));
}

describe("figure spec validation", () => {
  it("rejects unknown keys and empty panel lists", () => {
    expect(() => parseFigureSpec({ panels: [], output: { path: "x.svg" } })).toThrow(
      /invalid figure spec/,
    );
    expect(() =>
      parseFigureSpec({
        panels: [{ kind: "purity", csv: "a.csv", bogus: 1 }],
        output: { path: "x.svg" },
      }),
    ).toThrow(/bogus|Unrecognized/);
    expect(() =>
      parseFigureSpec({
        panels: [{ kind: "nonsense", csv: "a.csv" }],
        output: { path: "x.svg" },
      }),
    ).toThrow(/invalid figure spec/);
  });

  it("applies defaults", () => {
    const spec = parseFigureSpec({
      panels: [{ kind: "purity", csv: "a.csv" }],
      output: { path: "x.svg" },
    });
    expect(spec.layout.columns).toBe(1);
    expect(spec.output.format).toBe("svg");
    expect(spec.panels[0]).toMatchObject({ series: ["purity"] });
  });
});

describe("csv ingestion", () => {
  it("reads provenance-commented tables", () => {
    const table = readTable(join(FIXTURES, "trajectory.csv"));
    expect(table.columns[0]).toBe("t");
    expect(table.rowCount).toBeGreaterThan(50);
    expect(numericColumn(table, "purity")[0]).toBeCloseTo(1.0, 8);
  });

  it("names missing columns", () => {
    const table = readTable(join(FIXTURES, "trajectory.csv"));
    expect(() => requireColumns(table, ["no_such_column"])).toThrow(
      /missing required column.*no_such_column/,
    );
  });
});

describe("panel rendering", () => {
  it("purity panel uses the full [0, 1] axis and matches its golden file", () => {
    const spec = fixtureSpec(
      {
        kind: "purity",
        csv: join(FIXTURES, "trajectory.csv"),
        title: "purity decay",
      },
      "unused.svg",
    );
    const svg = renderToSvg(spec);
    // axis tick labels for the fixed purity range
    expect(svg).toContain(">0</text>");
    expect(svg).toContain(">1</text>");
    checkGolden("purity.svg", svg);
  });

  it("fit-dot panel draws two sign-colored dots per row when a3 is empty", () => {
    const spec = fixtureSpec(
      {
        kind: "fitdots",
        csv: join(FIXTURES, "purity_fits.csv"),
        title: "timescales",
      },
      "unused.svg",
    );
    const svg = renderToSvg(spec);
    const circles = svg.match(/<circle /g) ?? [];
    expect(circles.length).toBe(6); // 3 rows x 2 fitted terms
    expect(svg).toContain('fill="#1f4e9c"'); // positive amplitudes
    expect(svg).toContain('fill="#c03325"'); // negative amplitudes
    checkGolden("fitdots.svg", svg);
  });

  it("dot area tracks amplitude magnitude", () => {
    const spec = fixtureSpec(
      { kind: "fitdots", csv: join(FIXTURES, "purity_fits.csv") },
      "unused.svg",
    );
    const svg = renderToSvg(spec);
    const radii = [...svg.matchAll(/<circle [^>]*r="([0-9.]+)"/g)].map((m) =>
      Number(m[1]),
    );
    const largest = Math.max(...radii);
    const expected = Math.sqrt((600 * 0.8456) / Math.PI);
    expect(largest).toBeCloseTo(expected, 1);
  });

  it("surface panel renders four curves and matches its golden file", () => {
    const spec = fixtureSpec(
      { kind: "pes", csv: join(FIXTURES, "pes_x3.csv"), title: "surfaces" },
      "unused.svg",
    );
    const svg = renderToSvg(spec);
    const lines = svg.match(/<polyline /g) ?? [];
    expect(lines.length).toBe(4);
    checkGolden("pes.svg", svg);
  });

  it("re-rendering is byte-identical", () => {
    const spec = fixtureSpec(
      { kind: "pes", csv: join(FIXTURES, "pes_x3.csv") },
      "unused.svg",
    );
    expect(renderToSvg(spec)).toBe(renderToSvg(spec));
  });

  it("fails fast when a referenced column is absent", () => {
    const spec = fixtureSpec(
      {
        kind: "purity",
        csv: join(FIXTURES, "trajectory.csv"),
        series: ["purity", "missing_series"],
      },
      "unused.svg",
    );
    expect(() => renderToSvg(spec)).toThrow(/missing_series/);
  });
});

describe("end to end", () => {
  it("renders a multi-panel figure through the command entry point", async () => {
    const dir = mkdtempSync(join(tmpdir(), "hhdyn-plots-"));
    const outPath = join(dir, "figure.svg");
    const specPath = join(dir, "figure.json");
    writeFileSync(
      specPath,
      JSON.stringify({
        panels: [
          { kind: "purity", csv: join(FIXTURES, "trajectory.csv") },
          { kind: "fitdots", csv: join(FIXTURES, "purity_fits.csv") },
          { kind: "pes", csv: join(FIXTURES, "pes_x3.csv") },
        ],
        layout: { columns: 2 },
        output: { path: outPath, format: "svg" },
      }),
    );
    expect(await main(["render", "--spec", specPath])).toBe(0);
    const svg = readFileSync(outPath, "utf8");
    expect(svg.startsWith("<svg ")).toBe(true);
    expect(svg).toContain("840.00"); // two columns of default panel width
  });

  it("writes png output when requested", async () => {
    const dir = mkdtempSync(join(tmpdir(), "hhdyn-plots-"));
    const outPath = join(dir, "figure.png");
    const spec = parseFigureSpec({
      panels: [{ kind: "pes", csv: join(FIXTURES, "pes_x3.csv") }],
      output: { path: outPath, format: "png" },
    });
    await render(spec);
    const header = readFileSync(outPath).subarray(0, 8);
    expect([...header]).toEqual([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
  });

  it("returns a usage error for bad invocations", async () => {
    expect(await main(["draw"])).toBe(2);
    expect(await main(["render"])).toBe(2);
  });

  it("reports missing spec files", async () => {
    expect(await main(["render", "--spec", "/no/such/spec.json"])).toBe(1);
  });
});
