/**
 * Plot description: which CSV tables to read, which panels to draw, where
 * to write the image, and the per-series color map.
 */

import { readFileSync } from "fs";

export interface PlotSpec {
  baseline: string;
  variant?: string;
  output: string;
  panels: string[];
  style: Record<string, string>;
  force: boolean;
}

/** Panel order mirrors the figure layout: parameters first, then outcomes. */
export const DEFAULT_PANELS = ["parameters", "I", "R", "P_inf", "Y", "C", "N"];

/** Brown quantities in black, green in green; the rest fixed and distinct. */
export const DEFAULT_STYLE: Record<string, string> = {
  I: "#000000",
  R: "#007f00",
  P_inf: "#7f3fbf",
  Y: "#1f77b4",
  C: "#d62728",
  N: "#8c564b",
  alpha: "#e6a100",
  delta: "#888888",
  a_brown: "#000000",
  a_green: "#007f00",
};

export function makeSpec(doc: unknown, source = "<spec>"): PlotSpec {
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new Error(`${source}: plot spec must be a JSON object`);
  }
  const d = doc as Record<string, unknown>;
  if (typeof d.baseline !== "string" || d.baseline.length === 0) {
    throw new Error(`${source}: "baseline" must name a CSV path`);
  }
  if (typeof d.output !== "string" || d.output.length === 0) {
    throw new Error(`${source}: "output" must name the image path`);
  }
  if (d.variant !== undefined && typeof d.variant !== "string") {
    throw new Error(`${source}: "variant" must be a CSV path when present`);
  }
  let panels = DEFAULT_PANELS;
  if (d.panels !== undefined) {
    if (!Array.isArray(d.panels) || d.panels.some((p) => typeof p !== "string")) {
      throw new Error(`${source}: "panels" must be a list of column names`);
    }
    if (d.panels.length === 0) {
      throw new Error(`${source}: "panels" must not be empty`);
    }
    panels = d.panels as string[];
  }
  const style = { ...DEFAULT_STYLE };
  if (d.style !== undefined) {
    if (typeof d.style !== "object" || d.style === null || Array.isArray(d.style)) {
      throw new Error(`${source}: "style" must map series names to colors`);
    }
    for (const [k, v] of Object.entries(d.style as Record<string, unknown>)) {
      if (typeof v !== "string") {
        throw new Error(`${source}: style.${k} must be a color string`);
      }
      style[k] = v;
    }
  }
  return {
    baseline: d.baseline,
    variant: d.variant as string | undefined,
    output: d.output,
    panels,
    style,
    force: d.force === true,
  };
}

export function loadSpec(path: string): PlotSpec {
  let doc: unknown;
  try {
    doc = JSON.parse(readFileSync(path, "utf8"));
  } catch (e) {
    throw new Error(`${path}: cannot read plot spec (${(e as Error).message})`);
  }
  return makeSpec(doc, path);
}
