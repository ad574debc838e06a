/**
 * render_all <csv-dir> <out-dir>
 *
 * Reads fig1a.csv, fig1b.csv and fig2.csv from <csv-dir> (as written by
 * `brwss figures`) and writes fig1a.svg, fig1b.svg, fig2.svg to <out-dir>.
 * Exits nonzero on any schema violation, producing no image for the bad file.
 */

import { mkdirSync } from "fs";
import { renderAll } from "./render.js";
import { SchemaError } from "./csv.js";

const args = process.argv.slice(2);
if (args.length !== 2) {
  console.error("usage: render_all <csv-dir> <out-dir>");
  process.exit(2);
}
const [csvDir, outDir] = args;
try {
  mkdirSync(outDir, { recursive: true });
  const written = renderAll(csvDir, outDir);
  console.log(`wrote ${written.join(", ")} to ${outDir}`);
} catch (err) {
  if (err instanceof SchemaError) {
    console.error(`schema error: ${err.message}`);
    process.exit(1);
  }
  console.error(String(err));
  process.exit(1);
}
