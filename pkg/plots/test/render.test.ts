import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { readTable, SchemaError } from "../src/csv.js";
import { renderAll, renderFig1a, renderFig2 } from "../src/render.js";
import { renderChart, WIDTH, HEIGHT } from "../src/svg.js";

const tmp = (): string => mkdtempSync(join(tmpdir(), "plots-"));

const fig1a = "rho,x0,r\n1.1,3.5,0.05\n1.5,1.61,0.24\n2.0,0.95,0.9\n";
const fig1b = "m,t_root,t_expansion\n0,100.0,100.0\n1,101.4,101.5\n2,102.9,103.0\n";
const fig2 = "rho,t_root\n2.0,655.0\n3.5,13.0\n5.0,7.9\n";

function writeBundle(dir: string): void {
  writeFileSync(join(dir, "fig1a.csv"), fig1a);
  writeFileSync(join(dir, "fig1b.csv"), fig1b);
  writeFileSync(join(dir, "fig2.csv"), fig2);
}

describe("csv reader", () => {
  it("parses the dialect and validates the schema", () => {
    const dir = tmp();
    writeBundle(dir);
    const t = readTable(join(dir, "fig1a.csv"), ["rho", "x0", "r"]);
    expect(t.rows).toBe(3);
    expect(t.columns.get("x0")).toEqual([3.5, 1.61, 0.95]);
  });

  it("names the missing column", () => {
    const dir = tmp();
    writeFileSync(join(dir, "bad.csv"), "rho,x0\n1.1,3.5\n");
    expect(() => readTable(join(dir, "bad.csv"), ["rho", "x0", "r"]))
      .toThrowError(/missing column 'r'/);
  });

  it("rejects an empty file", () => {
    const dir = tmp();
    writeFileSync(join(dir, "empty.csv"), "");
    expect(() => readTable(join(dir, "empty.csv"), ["rho"])).toThrow(SchemaError);
  });

  it("rejects a header-only file", () => {
    const dir = tmp();
    writeFileSync(join(dir, "h.csv"), "rho,x0,r\n");
    expect(() => readTable(join(dir, "h.csv"), ["rho", "x0", "r"]))
      .toThrowError(/no data rows/);
  });
});

describe("svg renderer", () => {
  it("is a pure function of the data", () => {
    const spec = {
      title: "t",
      xLabel: "x",
      yLabel: "y",
      series: [{ label: "s", x: [0, 1, 2], y: [1, 4, 2], color: "#000000" }],
    };
    const a = renderChart(spec);
    const b = renderChart(spec);
    expect(a).toBe(b);
    expect(a).toContain(`width="${WIDTH}" height="${HEIGHT}"`);
  });

  it("refuses log scale on non-positive values", () => {
    expect(() => renderChart({
      title: "t", xLabel: "x", yLabel: "y", logY: true,
      series: [{ label: "s", x: [0, 1], y: [0, 2], color: "#000" }],
    })).toThrowError(/log-scale/);
  });
});

describe("figure pipeline", () => {
  it("renders all three images from a bundle", () => {
    const dir = tmp();
    const out = tmp();
    writeBundle(dir);
    const written = renderAll(dir, out);
    expect(written).toEqual(["fig1a.svg", "fig1b.svg", "fig2.svg"]);
    const svg = readFileSync(join(out, "fig1a.svg"), "utf-8");
    expect(svg).toContain("<svg");
    expect(svg).toContain("x0(rho)");
  });

  it("fig2 uses a log y-axis", () => {
    const dir = tmp();
    const out = tmp();
    writeBundle(dir);
    renderFig2(join(dir, "fig2.csv"), join(out, "fig2.svg"));
    const svg = readFileSync(join(out, "fig2.svg"), "utf-8");
    expect(svg).toContain("(log scale)");
  });

  it("schema violations abort without an image", () => {
    const dir = tmp();
    const out = tmp();
    writeFileSync(join(dir, "fig1a.csv"), "rho,x0\n1.1,2.0\n");
    expect(() => renderFig1a(join(dir, "fig1a.csv"), join(out, "fig1a.svg")))
      .toThrow(SchemaError);
    expect(() => readFileSync(join(out, "fig1a.svg"))).toThrow();
  });
});
