/**
 * Figure CLI: render one CSV into its figure, or every known CSV in a
 * directory. Output files are written atomically; a failed render leaves
 * nothing behind. Exit codes: 0 ok, 1 runtime error, 2 usage error.
 */

import { mkdirSync, readFileSync, readdirSync, renameSync, writeFileSync, rmSync } from "node:fs";
import { basename, join } from "node:path";

import { CsvError, parseCsv } from "./csv.js";
import { FIGURES, figureForFile } from "./figures.js";

export function renderToFile(figureId: string, csvPath: string, outPath: string): void {
  const spec = FIGURES[figureId];
  if (!spec) {
    throw new CsvError(`unknown figure '${figureId}' (known: ${Object.keys(FIGURES).join(", ")})`);
  }
  const table = parseCsv(readFileSync(csvPath, "utf-8"));
  const svg = spec.render(table);
  const tmp = `${outPath}.tmp`;
  writeFileSync(tmp, svg, "utf-8");
  try {
    renameSync(tmp, outPath);
  } catch (err) {
    rmSync(tmp, { force: true });
    throw err;
  }
}

export function renderAll(dir: string, outDir: string): string[] {
  mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  const files = readdirSync(dir).filter((f) => f.endsWith(".csv")).sort();
  for (const file of files) {
    const figure = figureForFile(basename(file, ".csv"));
    if (figure === null) continue;
    const out = join(outDir, `${basename(file, ".csv")}.svg`);
    renderToFile(figure, join(dir, file), out);
    written.push(out);
  }
  return written;
}

function getFlag(args: string[], name: string): string | undefined {
  const i = args.indexOf(name);
  return i >= 0 && i + 1 < args.length ? args[i + 1] : undefined;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === "render") {
      const figure = getFlag(rest, "--figure");
      const csv = getFlag(rest, "--csv");
      const out = getFlag(rest, "--out");
      if (!figure || !csv || !out) {
        console.error("usage: render --figure ID --csv PATH --out PATH");
        return 2;
      }
      renderToFile(figure, csv, out);
      console.log(out);
      return 0;
    }
    if (command === "render-all") {
      const dir = getFlag(rest, "--dir");
      const out = getFlag(rest, "--out");
      if (!dir || !out) {
        console.error("usage: render-all --dir CSV_DIR --out FIG_DIR");
        return 2;
      }
      const written = renderAll(dir, out);
      for (const w of written) console.log(w);
      if (written.length === 0) {
        console.error(`no renderable CSV files found in ${dir}`);
        return 1;
      }
      return 0;
    }
    console.error(`usage: {render|render-all} ...  (got '${command ?? ""}')`);
    return 2;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
