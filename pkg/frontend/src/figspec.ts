/**
 * Figure specification: which CSV files feed which panels, how panels
 * are laid out, and where the image goes.  Validated with zod; unknown
 * keys are rejected so typos fail fast.
 */

import { z } from "zod";

export const purityPanelSchema = z
  .object({
    kind: z.literal("purity"),
    csv: z.string(),
    /** columns of trajectory.csv to draw, default purity only */
    series: z.array(z.string()).nonempty().default(["purity"]),
    title: z.string().default(""),
    xLabel: z.string().default("time (hbar/t0)"),
    yLabel: z.string().default("purity"),
  })
  .strict();

export const fitDotsPanelSchema = z
  .object({
    kind: z.literal("fitdots"),
    csv: z.string(),
    title: z.string().default(""),
    xLabel: z.string().default("U (t0)"),
    yLabel: z.string().default("timescale (hbar/t0)"),
    /** dot area per unit |amplitude|, in px^2 */
    areaScale: z.number().positive().default(600),
    positiveColor: z.string().default("#1f4e9c"),
    negativeColor: z.string().default("#c03325"),
    logY: z.boolean().default(true),
  })
  .strict();

export const pesPanelSchema = z
  .object({
    kind: z.literal("pes"),
    csv: z.string(),
    title: z.string().default(""),
    xLabel: z.string().default("x"),
    yLabel: z.string().default("energy (t0)"),
  })
  .strict();

export const panelSchema = z.discriminatedUnion("kind", [
  purityPanelSchema,
  fitDotsPanelSchema,
  pesPanelSchema,
]);

export const figureSpecSchema = z
  .object({
    panels: z.array(panelSchema).nonempty(),
    layout: z
      .object({ columns: z.number().int().positive().default(1) })
      .strict()
      .default({ columns: 1 }),
    panelWidth: z.number().positive().default(420),
    panelHeight: z.number().positive().default(300),
    output: z
      .object({
        path: z.string(),
        format: z.enum(["svg", "png"]).default("svg"),
      })
      .strict(),
  })
  .strict();

export type PurityPanel = z.infer<typeof purityPanelSchema>;
export type FitDotsPanel = z.infer<typeof fitDotsPanelSchema>;
export type PesPanel = z.infer<typeof pesPanelSchema>;
export type Panel = z.infer<typeof panelSchema>;
export type FigureSpec = z.infer<typeof figureSpecSchema>;

export function parseFigureSpec(raw: unknown): FigureSpec {
  const result = figureSpecSchema.safeParse(raw);
  if (!result.success) {
    const detail = result.error.issues
      .map((issue) => `${issue.path.join(".") || "(root)"}: ${issue.message}`)
      .join("; ");
    throw new Error(`invalid figure spec: ${detail}`);
  }
  return result.data;
}
