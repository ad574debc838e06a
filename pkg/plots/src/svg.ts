/**
 * Minimal deterministic SVG line charts: fixed canvas, default fonts, no
 * randomness, so identical input data yields byte-identical images.
 */

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
  dashed?: boolean;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  logY?: boolean;
}

export const WIDTH = 760;
export const HEIGHT = 520;
const MARGIN = { top: 48, right: 24, bottom: 56, left: 82 };

const fmt = (v: number): string => {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) return v.toExponential(1);
  return Number(v.toPrecision(6)).toString();
};

function niceTicks(lo: number, hi: number, n = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / n;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const candidates = [1, 2, 2.5, 5, 10].map((c) => c * mag);
  const step = candidates.find((c) => span / c <= n) ?? candidates[candidates.length - 1];
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.floor(Math.log10(lo)); e <= Math.ceil(Math.log10(hi)); e++) {
    const v = Math.pow(10, e);
    if (v >= lo / 1.0001 && v <= hi * 1.0001) ticks.push(v);
  }
  return ticks.length >= 2 ? ticks : [lo, hi];
}

export function renderChart(spec: ChartSpec): string {
  const xs = spec.series.flatMap((s) => s.x);
  const ys = spec.series.flatMap((s) => s.y);
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  let yLo = Math.min(...ys);
  let yHi = Math.max(...ys);
  if (spec.logY && yLo <= 0) {
    throw new Error(`log-scale y-axis requires positive values, got min ${yLo}`);
  }
  if (yLo === yHi) {
    yLo -= 0.5;
    yHi += 0.5;
  }

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const tx = (v: number): number => MARGIN.left + ((v - xLo) / (xHi - xLo || 1)) * plotW;
  const ty = (v: number): number => {
    const f = spec.logY
      ? (Math.log10(v) - Math.log10(yLo)) / (Math.log10(yHi) - Math.log10(yLo) || 1)
      : (v - yLo) / (yHi - yLo || 1);
    return MARGIN.top + plotH - f * plotH;
  };

  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`);
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(`<text x="${WIDTH / 2}" y="26" text-anchor="middle" font-family="sans-serif" font-size="16">${spec.title}</text>`);

  const xTicks = niceTicks(xLo, xHi);
  const yTicks = spec.logY ? logTicks(yLo, yHi) : niceTicks(yLo, yHi);
  for (const v of xTicks) {
    const px = tx(v);
    parts.push(`<line x1="${px.toFixed(2)}" y1="${MARGIN.top}" x2="${px.toFixed(2)}" y2="${MARGIN.top + plotH}" stroke="#dddddd" stroke-width="1"/>`);
    parts.push(`<text x="${px.toFixed(2)}" y="${MARGIN.top + plotH + 20}" text-anchor="middle" font-family="sans-serif" font-size="12">${fmt(v)}</text>`);
  }
  for (const v of yTicks) {
    const py = ty(v);
    parts.push(`<line x1="${MARGIN.left}" y1="${py.toFixed(2)}" x2="${MARGIN.left + plotW}" y2="${py.toFixed(2)}" stroke="#dddddd" stroke-width="1"/>`);
    parts.push(`<text x="${MARGIN.left - 8}" y="${(py + 4).toFixed(2)}" text-anchor="end" font-family="sans-serif" font-size="12">${fmt(v)}</text>`);
  }
  parts.push(`<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333333"/>`);
  parts.push(`<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-family="sans-serif" font-size="13">${spec.xLabel}</text>`);
  parts.push(`<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">${spec.yLabel}${spec.logY ? " (log scale)" : ""}</text>`);

  for (const s of spec.series) {
    const pts = s.x.map((xv, i) => `${tx(xv).toFixed(2)},${ty(s.y[i]).toFixed(2)}`).join(" ");
    const dash = s.dashed ? ` stroke-dasharray="7,4"` : "";
    parts.push(`<polyline points="${pts}" fill="none" stroke="${s.color}" stroke-width="1.8"${dash}/>`);
  }

  spec.series.forEach((s, i) => {
    const lx = MARGIN.left + 14;
    const ly = MARGIN.top + 16 + i * 20;
    const dash = s.dashed ? ` stroke-dasharray="7,4"` : "";
    parts.push(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 28}" y2="${ly - 4}" stroke="${s.color}" stroke-width="1.8"${dash}/>`);
    parts.push(`<text x="${lx + 34}" y="${ly}" font-family="sans-serif" font-size="12">${s.label}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
