#!/usr/bin/env node
/**
 * Entry point: `render --spec <figure.json>` reads a figure
 * specification, renders the panels from their CSV sources, and writes
 * the image named in the spec.
 */

import { readFileSync } from "node:fs";

import { parseFigureSpec } from "./figspec.js";
import { render } from "./render.js";

export async function main(argv: string[]): Promise<number> {
  const [command, ...rest] = argv;
  if (command !== "render") {
    process.stderr.write("usage: render --spec <figure.json>\n");
    return 2;
  }
  const specIndex = rest.indexOf("--spec");
  if (specIndex < 0 || specIndex + 1 >= rest.length) {
    process.stderr.write("usage: render --spec <figure.json>\n");
    return 2;
  }
  const specPath = rest[specIndex + 1];
  try {
    const spec = parseFigureSpec(JSON.parse(readFileSync(specPath, "utf8")));
    const written = await render(spec);
    process.stdout.write(`${written}\n`);
    return 0;
  } catch (error) {
    process.stderr.write(`${(error as Error).message}\n`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
