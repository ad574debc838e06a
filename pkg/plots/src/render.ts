/**
 * The three figure renderers.  These scripts never recompute any math: they
 * read the CLI's CSV bundle and draw exactly what it contains.
 */

import { writeFileSync } from "fs";
import { join } from "path";
import { readTable } from "./csv.js";
import { renderChart } from "./svg.js";

export function renderFig1a(csvPath: string, outPath: string): void {
  const t = readTable(csvPath, ["rho", "x0", "r"]);
  const svg = renderChart({
    title: "Slow-regime constants against the growth parameter",
    xLabel: "rho",
    yLabel: "value",
    series: [
      { label: "x0(rho)", x: t.columns.get("rho")!, y: t.columns.get("x0")!, color: "#1f77b4" },
      { label: "r(rho)", x: t.columns.get("rho")!, y: t.columns.get("r")!, color: "#d62728" },
    ],
  });
  writeFileSync(outPath, svg, "utf-8");
}

export function renderFig1b(csvPath: string, outPath: string): void {
  const t = readTable(csvPath, ["m", "t_root", "t_expansion"]);
  const svg = renderChart({
    title: "First-moment root and affine expansion against target distance",
    xLabel: "m",
    yLabel: "time",
    series: [
      { label: "equation root", x: t.columns.get("m")!, y: t.columns.get("t_root")!, color: "#1f77b4" },
      { label: "x0*d + r*m", x: t.columns.get("m")!, y: t.columns.get("t_expansion")!, color: "#d62728", dashed: true },
    ],
  });
  writeFileSync(outPath, svg, "utf-8");
}

export function renderFig2(csvPath: string, outPath: string): void {
  const t = readTable(csvPath, ["rho", "t_root"]);
  const svg = renderChart({
    title: "First-moment root across the growth parameter",
    xLabel: "rho",
    yLabel: "time",
    logY: true,
    series: [
      { label: "t_root(rho)", x: t.columns.get("rho")!, y: t.columns.get("t_root")!, color: "#1f77b4" },
    ],
  });
  writeFileSync(outPath, svg, "utf-8");
}

export function renderAll(csvDir: string, outDir: string): string[] {
  const written: string[] = [];
  renderFig1a(join(csvDir, "fig1a.csv"), join(outDir, "fig1a.svg"));
  written.push("fig1a.svg");
  renderFig1b(join(csvDir, "fig1b.csv"), join(outDir, "fig1b.svg"));
  written.push("fig1b.svg");
  renderFig2(join(csvDir, "fig2.csv"), join(outDir, "fig2.svg"));
  written.push("fig2.svg");
  return written;
}
