/**
 * Multi-panel figure renderer for the solver's per-node CSV tables.
 *
 * One panel per requested column (the synthetic "parameters" panel overlays
 * delta / a_brown / a_green).  Baseline series are solid, variant series
 * dashed, colors from the spec's style map.  Output is a single SVG file;
 * an existing file is only replaced when the force flag is set.
 */

import { existsSync, mkdirSync, readFileSync, writeFileSync } from "fs";
import { dirname } from "path";

import { parseCsv, numericColumn, Table } from "./csv.js";
import { PlotSpec } from "./spec.js";
import { fmt, line, linearScale, polyline, text, tick } from "./svg.js";

const PANEL_W = 320;
const PANEL_H = 250;
const COLS = 4;
const LEGEND_H = 34;
const MARGIN = { left: 52, right: 12, top: 26, bottom: 32 };

const PARAMETER_SERIES = ["delta", "a_brown", "a_green"];

interface Series {
  label: string;
  color: string;
  dashed: boolean;
  values: number[];
}

function panelSeries(panel: string, spec: PlotSpec, baseline: Table,
                     variant: Table | undefined): Series[] {
  const names = panel === "parameters" ? PARAMETER_SERIES : [panel];
  const out: Series[] = [];
  for (const name of names) {
    const color = spec.style[name] ?? "#333333";
    out.push({
      label: name,
      color,
      dashed: false,
      values: numericColumn(baseline, name, spec.baseline),
    });
    if (variant !== undefined) {
      out.push({
        label: name,
        color,
        dashed: true,
        values: numericColumn(variant, name, spec.variant ?? "<variant>"),
      });
    }
  }
  return out;
}

function drawPanel(panel: string, series: Series[], nodes: number[],
                   x0: number, y0: number): string {
  const left = x0 + MARGIN.left;
  const right = x0 + PANEL_W - MARGIN.right;
  const top = y0 + MARGIN.top;
  const bottom = y0 + PANEL_H - MARGIN.bottom;

  let lo = Infinity;
  let hi = -Infinity;
  for (const s of series) {
    for (const v of s.values) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (!(hi > lo)) {
    lo -= 1;
    hi += 1;
  } else {
    const pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  const sx = linearScale(nodes[0], nodes[nodes.length - 1], left, right);
  const sy = linearScale(lo, hi, bottom, top);

  const parts: string[] = [];
  parts.push(text(x0 + PANEL_W / 2, y0 + 16, panel,
                  { "text-anchor": "middle", "font-size": "13", "font-weight": "bold" }));
  parts.push(line(left, top, left, bottom, { stroke: "#000000", "stroke-width": "1" }));
  parts.push(line(left, bottom, right, bottom, { stroke: "#000000", "stroke-width": "1" }));

  const mid = nodes[Math.floor((nodes.length - 1) / 2)];
  for (const n of [nodes[0], mid, nodes[nodes.length - 1]]) {
    parts.push(line(sx(n), bottom, sx(n), bottom + 4, { stroke: "#000000" }));
    parts.push(text(sx(n), bottom + 16, String(n),
                    { "text-anchor": "middle", "font-size": "10" }));
  }
  for (const v of [lo, (lo + hi) / 2, hi]) {
    parts.push(line(left - 4, sy(v), left, sy(v), { stroke: "#000000" }));
    parts.push(text(left - 7, sy(v) + 3, tick(v),
                    { "text-anchor": "end", "font-size": "10" }));
  }

  for (const s of series) {
    const pts: [number, number][] = s.values.map((v, i) => [sx(nodes[i]), sy(v)]);
    const attrs: Record<string, string> = {
      class: s.dashed ? "series variant" : "series baseline",
      stroke: s.color,
      "stroke-width": "1.6",
    };
    if (s.dashed) attrs["stroke-dasharray"] = "6 4";
    parts.push(polyline(pts, attrs));
  }
  return `<g class="panel" data-panel="${panel}">` + parts.join("") + "</g>";
}

export function renderToString(spec: PlotSpec, baseline: Table,
                               variant: Table | undefined): string {
  const nodes = numericColumn(baseline, "node", spec.baseline);
  if (variant !== undefined) {
    const vn = numericColumn(variant, "node", spec.variant ?? "<variant>");
    if (vn.length !== nodes.length) {
      throw new Error(
        `baseline has ${nodes.length} nodes but variant has ${vn.length}`);
    }
  }
  const rows = Math.ceil(spec.panels.length / COLS);
  const width = COLS * PANEL_W + 16;
  const height = LEGEND_H + rows * PANEL_H + 8;

  const parts: string[] = [];
  parts.push(line(16, 18, 48, 18, { stroke: "#000000", "stroke-width": "1.6" }));
  parts.push(text(54, 22, `baseline: ${spec.baseline}`, { "font-size": "11" }));
  if (variant !== undefined) {
    parts.push(line(320, 18, 352, 18,
                    { stroke: "#000000", "stroke-width": "1.6", "stroke-dasharray": "6 4" }));
    parts.push(text(358, 22, `variant: ${spec.variant}`, { "font-size": "11" }));
  }
  spec.panels.forEach((panel, i) => {
    const x0 = (i % COLS) * PANEL_W + 8;
    const y0 = LEGEND_H + Math.floor(i / COLS) * PANEL_H;
    parts.push(drawPanel(panel, panelSeries(panel, spec, baseline, variant),
                         nodes, x0, y0));
  });

  return `<svg xmlns="http://www.w3.org/2000/svg" width="${fmt(width)}" ` +
    `height="${fmt(height)}" viewBox="0 0 ${fmt(width)} ${fmt(height)}" ` +
    `font-family="Helvetica, Arial, sans-serif">` +
    `<rect width="100%" height="100%" fill="#ffffff"/>` +
    parts.join("") + "</svg>\n";
}

export function render(spec: PlotSpec): string {
  const baseline = parseCsv(readFileSync(spec.baseline, "utf8"), spec.baseline);
  const variant = spec.variant === undefined
    ? undefined
    : parseCsv(readFileSync(spec.variant, "utf8"), spec.variant);
  const svg = renderToString(spec, baseline, variant);
  if (existsSync(spec.output) && !spec.force) {
    throw new Error(
      `refusing to overwrite ${spec.output} (set "force": true or pass --force)`);
  }
  mkdirSync(dirname(spec.output), { recursive: true });
  writeFileSync(spec.output, svg);
  return spec.output;
}
