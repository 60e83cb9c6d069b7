/**
 * Render one figure from simulation CSV output.
 *
 * Usage:  node dist/cli.js <figure> <input.csv> [more.csv ...] <output.svg>
 *
 * Figures: spectrum, fig2 (rates), fig3 (polarization loop),
 * fig4 (efficiency/power; extra inputs overlay asymmetric sweeps),
 * fig5 (distances), fig6 (per-stroke energies).
 */

import { SchemaError } from "./csv.js";
import { render, type FigureId } from "./figures.js";

export function main(argv: string[]): number {
  if (argv.length < 3) {
    console.error("usage: <figure> <input.csv> [more.csv ...] <output.svg>");
    return 2;
  }
  const [figure, ...rest] = argv;
  const output = rest[rest.length - 1];
  const inputs = rest.slice(0, -1);
  try {
    const path = render({ figure: figure as FigureId, inputs, output });
    console.log(`wrote ${path}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    console.error(`render failed: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
