/**
 * figures --in <dir> --out <dir> --which {velocity|tbs|avs|all}
 *
 * Reads every summary*.csv under --in, pools the rows, and writes one SVG
 * per requested family into --out. Returns 1 on schema problems (missing
 * columns, unreadable CSV), 2 on usage errors. The bin shim in main.ts
 * turns the return value into the process exit code.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { parseArgs } from "node:util";

import { SchemaError, SummaryRow, parseSummary } from "./summary";
import { FAMILIES, render } from "./panels";

const USAGE =
  "usage: figures --in <dir> --out <dir> --which {velocity|tbs|avs|all}";

export function main(argv: string[]): number {
  let opts: { in?: string; out?: string; which?: string };
  try {
    opts = parseArgs({
      args: argv,
      options: {
        in: { type: "string" },
        out: { type: "string" },
        which: { type: "string", default: "all" },
      },
      allowPositionals: false,
    }).values;
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n${USAGE}\n`);
    return 2;
  }

  if (!opts.in || !opts.out) {
    process.stderr.write(`${USAGE}\n`);
    return 2;
  }
  const which = opts.which ?? "all";
  const names = which === "all" ? Object.keys(FAMILIES) : [which];
  for (const name of names) {
    if (!(name in FAMILIES)) {
      process.stderr.write(`unknown figure family "${name}"\n${USAGE}\n`);
      return 2;
    }
  }

  let entries: string[];
  try {
    entries = fs.readdirSync(opts.in);
  } catch (err) {
    process.stderr.write(`cannot read --in directory: ${(err as Error).message}\n`);
    return 2;
  }
  const csvs = entries
    .filter((f) => f.startsWith("summary") && f.endsWith(".csv"))
    .sort();
  if (csvs.length === 0) {
    process.stderr.write(`no summary*.csv files in ${opts.in}\n`);
    return 2;
  }

  const rows: SummaryRow[] = [];
  try {
    for (const f of csvs) {
      const full = path.join(opts.in, f);
      rows.push(...parseSummary(fs.readFileSync(full, "utf8"), f));
    }
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`schema error: ${err.message}\n`);
      return 1;
    }
    throw err;
  }

  fs.mkdirSync(opts.out, { recursive: true });
  for (const name of names) {
    const spec = FAMILIES[name];
    let svg: string;
    try {
      svg = render(spec, rows);
    } catch (err) {
      if (err instanceof SchemaError) {
        process.stderr.write(`schema error in family "${name}": ${err.message}\n`);
        return 1;
      }
      throw err;
    }
    const dest = path.join(opts.out, spec.output);
    fs.writeFileSync(dest, svg, "utf8");
    process.stdout.write(`wrote ${dest}\n`);
  }
  return 0;
}
