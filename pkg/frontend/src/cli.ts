#!/usr/bin/env node
/**
 * plots --in <csv> [--fit <json>] --kind {growth|region|sweep} --out <svg>
 *
 * Renders one figure from a laboratory CSV. Fails (exit 1) without writing
 * anything when an input is missing or violates its schema.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { parseCsv, SchemaError } from "./csv.js";
import { Fit, parseFit } from "./fit.js";
import { FigureKind, render } from "./render.js";

interface Args {
  input: string;
  fit: string | null;
  kind: FigureKind;
  out: string;
}

export function parseArgs(argv: string[]): Args {
  const values: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    if (!flag.startsWith("--") || i + 1 >= argv.length) {
      throw new SchemaError(`usage: plots --in <csv> [--fit <json>] --kind <kind> --out <svg>`);
    }
    values[flag.slice(2)] = argv[i + 1];
  }
  const kinds: FigureKind[] = ["growth", "region", "sweep"];
  const kind = values["kind"] as FigureKind;
  if (!kinds.includes(kind)) {
    throw new SchemaError(`--kind must be one of ${kinds.join(", ")}`);
  }
  if (!values["in"] || !values["out"]) {
    throw new SchemaError("--in and --out are required");
  }
  return { input: values["in"], fit: values["fit"] ?? null, kind, out: values["out"] };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 2;
  }
  try {
    const table = parseCsv(readFileSync(args.input, "utf8"));
    let fit: Fit | null = null;
    if (args.fit !== null) {
      fit = parseFit(readFileSync(args.fit, "utf8"));
    }
    const svg = render(args.kind, table, fit);
    writeFileSync(args.out, svg);
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 1;
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
