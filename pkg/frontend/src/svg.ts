/**
 * Minimal deterministic SVG assembly: fixed coordinate formatting, no
 * timestamps, no randomness, so identical inputs give identical bytes.
 */

export function fmt(v: number): string {
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function tag(name: string, attrs: Record<string, string>, body?: string): string {
  const a = Object.entries(attrs)
    .map(([k, v]) => ` ${k}="${esc(v)}"`)
    .join("");
  return body === undefined ? `<${name}${a}/>` : `<${name}${a}>${body}</${name}>`;
}

export function text(x: number, y: number, s: string, attrs: Record<string, string> = {}): string {
  return tag("text", { x: fmt(x), y: fmt(y), ...attrs }, esc(s));
}

export function polyline(points: [number, number][], attrs: Record<string, string>): string {
  const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return tag("polyline", { points: pts, fill: "none", ...attrs });
}

export function line(x1: number, y1: number, x2: number, y2: number,
                     attrs: Record<string, string>): string {
  return tag("line", { x1: fmt(x1), y1: fmt(y1), x2: fmt(x2), y2: fmt(y2), ...attrs });
}

/** Tick label: short, locale-free, stable. */
export function tick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.01) return v.toExponential(1);
  return Number(v.toPrecision(3)).toString();
}

export function linearScale(lo: number, hi: number, outLo: number, outHi: number) {
  const span = hi - lo || 1;
  return (v: number) => outLo + ((v - lo) / span) * (outHi - outLo);
}
