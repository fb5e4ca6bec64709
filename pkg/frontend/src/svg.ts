/**
 * Minimal deterministic SVG scene building.  All coordinates are
 * rounded to fixed precision so identical inputs produce byte-identical
 * documents on every platform.
 */

export function fmt(value: number): string {
  if (!Number.isFinite(value)) {
    throw new Error(`non-finite coordinate: ${value}`);
  }
  const rounded = value.toFixed(2);
  return rounded === "-0.00" ? "0.00" : rounded;
}

export function escapeText(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

export interface Scale {
  (value: number): number;
  domain: [number, number];
}

export function linearScale(
  domain: [number, number],
  range: [number, number],
): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const scale = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  return scale;
}

export function logScale(
  domain: [number, number],
  range: [number, number],
): Scale {
  if (domain[0] <= 0 || domain[1] <= 0) {
    throw new Error("log scale requires a positive domain");
  }
  const inner = linearScale([Math.log10(domain[0]), Math.log10(domain[1])], range);
  const scale = ((value: number) => {
    if (value <= 0) throw new Error(`log scale got non-positive value ${value}`);
    return inner(Math.log10(value));
  }) as Scale;
  scale.domain = domain;
  return scale;
}

/** Round-number ticks covering the domain, at most `count + 1` values. */
export function linearTicks(domain: [number, number], count = 5): number[] {
  const [lo, hi] = domain;
  if (lo === hi) return [lo];
  const rawStep = (hi - lo) / count;
  const magnitude = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const residual = rawStep / magnitude;
  const step =
    (residual >= 5 ? 10 : residual >= 2 ? 5 : residual >= 1 ? 2 : 1) * magnitude;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

export function logTicks(domain: [number, number]): number[] {
  const ticks: number[] = [];
  const lo = Math.floor(Math.log10(domain[0]));
  const hi = Math.ceil(Math.log10(domain[1]));
  for (let exp = lo; exp <= hi; exp += 1) {
    const v = Math.pow(10, exp);
    if (v >= domain[0] * 0.999 && v <= domain[1] * 1.001) ticks.push(v);
  }
  return ticks.length > 0 ? ticks : [domain[0]];
}

export function tickLabel(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 1e4 || abs < 1e-3) return value.toExponential(0);
  return String(Number(value.toPrecision(6)));
}

export class SvgBuilder {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${fmt(width)}" ` +
        `height="${fmt(height)}" viewBox="0 0 ${fmt(width)} ${fmt(height)}" ` +
        `font-family="Helvetica, Arial, sans-serif">`,
    );
    this.parts.push(
      `<rect x="0" y="0" width="${fmt(width)}" height="${fmt(height)}" fill="#ffffff"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${stroke}" stroke-width="${fmt(width)}"/>`,
    );
  }

  polyline(points: [number, number][], stroke: string, width = 1.5): void {
    const path = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${path}" fill="none" stroke="${stroke}" ` +
        `stroke-width="${fmt(width)}"/>`,
    );
  }

  circle(cx: number, cy: number, r: number, fill: string, opacity = 0.85): void {
    this.parts.push(
      `<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(r)}" fill="${fill}" ` +
        `fill-opacity="${fmt(opacity)}"/>`,
    );
  }

  text(
    x: number,
    y: number,
    content: string,
    options: { size?: number; anchor?: string; rotate?: boolean } = {},
  ): void {
    const size = options.size ?? 11;
    const anchor = options.anchor ?? "start";
    const transform = options.rotate
      ? ` transform="rotate(-90 ${fmt(x)} ${fmt(y)})"`
      : "";
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-size="${fmt(size)}" ` +
        `text-anchor="${anchor}" fill="#000000"${transform}>` +
        `${escapeText(content)}</text>`,
    );
  }

  raw(fragment: string): void {
    this.parts.push(fragment);
  }

  toString(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}
