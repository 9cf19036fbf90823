/** SVG posterior chart: mean with a +-1 std band per candidate, plus the
 * best observed value as a horizontal line. Pure string generation; every
 * plotted number is a field from a service response. */

import type { PosteriorPoint } from "./api.js";

export interface ChartOptions {
  width?: number;
  height?: number;
  pad?: number;
}

export function chartSvg(
  points: PosteriorPoint[],
  bestObserved: number | null,
  opts: ChartOptions = {},
): string {
  const width = opts.width ?? 640;
  const height = opts.height ?? 220;
  const pad = opts.pad ?? 28;
  if (points.length === 0) {
    return `<svg viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg"></svg>`;
  }
  const los = points.map((p) => p.mean - p.std);
  const his = points.map((p) => p.mean + p.std);
  let lo = Math.min(...los, bestObserved ?? Infinity);
  let hi = Math.max(...his, bestObserved ?? -Infinity);
  if (hi - lo < 1e-9) {
    lo -= 1;
    hi += 1;
  }
  const yPix = (v: number) => height - pad - ((v - lo) / (hi - lo)) * (height - 2 * pad);
  const step = (width - 2 * pad) / points.length;
  const xPix = (i: number) => pad + step * (i + 0.5);

  const parts: string[] = [
    `<svg viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg">`,
  ];
  points.forEach((p, i) => {
    const x = xPix(i).toFixed(1);
    parts.push(
      `<line class="band" x1="${x}" y1="${yPix(p.mean - p.std).toFixed(1)}"` +
        ` x2="${x}" y2="${yPix(p.mean + p.std).toFixed(1)}">` +
        `<title>${p.arm_id}: ${p.mean.toFixed(3)} ± ${p.std.toFixed(3)}</title></line>`,
    );
    parts.push(
      `<circle class="mean" cx="${x}" cy="${yPix(p.mean).toFixed(1)}" r="3" ` +
        `data-arm="${p.arm_id}" data-mean="${p.mean}" data-std="${p.std}"/>`,
    );
  });
  if (bestObserved !== null) {
    const y = yPix(bestObserved).toFixed(1);
    parts.push(
      `<line class="best" x1="${pad}" y1="${y}" x2="${width - pad}" y2="${y}" ` +
        `data-best="${bestObserved}"/>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
