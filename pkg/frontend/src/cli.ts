#!/usr/bin/env node
/**
 * Usage: polnet-plots render <plotspec.json> [--force]
 *
 * Reads a plot spec, renders the referenced CSV tables to one SVG figure.
 * Errors print a JSON object on stderr and exit 1; usage errors exit 2.
 */

import { pathToFileURL } from "url";

import { render } from "./render.js";
import { loadSpec } from "./spec.js";

export function main(argv: string[]): number {
  const args = argv.filter((a) => a !== "--force");
  const force = args.length !== argv.length;
  if (args.length !== 2 || args[0] !== "render") {
    process.stderr.write(
      "usage: polnet-plots render <plotspec.json> [--force]\n");
    return 2;
  }
  try {
    const spec = loadSpec(args[1]);
    if (force) spec.force = true;
    const out = render(spec);
    process.stdout.write(JSON.stringify({ ok: true, output: out }) + "\n");
    return 0;
  } catch (e) {
    process.stderr.write(
      JSON.stringify({ error: "RenderError", message: (e as Error).message }) + "\n");
    return 1;
  }
}

if (import.meta.url === pathToFileURL(process.argv[1] ?? "").href) {
  process.exit(main(process.argv.slice(2)));
}
