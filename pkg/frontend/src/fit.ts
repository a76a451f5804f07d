/**
 * Reader for the fit sidecar (fit.json). Annotations shown on figures come
 * from this file verbatim; nothing is ever re-fitted here.
 */

import { SchemaError } from "./csv.js";

export interface Fit {
  model: string;
  slope: number;
  intercept: number;
  rSquared: number;
}

export function parseFit(text: string): Fit {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (e) {
    throw new SchemaError(`fit file is not valid JSON: ${(e as Error).message}`);
  }
  if (typeof raw !== "object" || raw === null) {
    throw new SchemaError("fit file must hold a JSON object");
  }
  const obj = raw as Record<string, unknown>;
  const coeffs = obj["coefficients"];
  if (typeof coeffs !== "object" || coeffs === null) {
    throw new SchemaError("fit file: missing key 'coefficients'");
  }
  const c = coeffs as Record<string, unknown>;
  for (const key of ["slope", "intercept"]) {
    if (typeof c[key] !== "number") {
      throw new SchemaError(`fit file: missing numeric coefficient '${key}'`);
    }
  }
  if (typeof obj["r_squared"] !== "number") {
    throw new SchemaError("fit file: missing numeric key 'r_squared'");
  }
  return {
    model: typeof obj["model"] === "string" ? (obj["model"] as string) : "log",
    slope: c["slope"] as number,
    intercept: c["intercept"] as number,
    rSquared: obj["r_squared"] as number,
  };
}

/** The slope annotation, e.g. "≈ 1.413" or "≈ 25.14". */
export function slopeAnnotation(fit: Fit): string {
  return `≈ ${Number(fit.slope.toPrecision(4))}`;
}
