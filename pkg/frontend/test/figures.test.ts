import { mkdtempSync, readFileSync, writeFileSync, existsSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { parseCsv, SchemaError } from "../src/csv.js";
import { render, type FigureId } from "../src/figures.js";
import { main } from "../src/cli.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixtures = join(here, "fixtures");
const outDir = mkdtempSync(join(tmpdir(), "qstirling-figs-"));

const CASES: [FigureId, string[]][] = [
  ["spectrum", ["spectrum.csv"]],
  ["fig2", ["rates.csv"]],
  ["fig3", ["trajectory.csv"]],
  ["fig4", ["sweep_symmetric.csv"]],
  ["fig5", ["distances_symmetric.csv"]],
  ["fig6", ["sweep_symmetric.csv"]],
];

describe("figure recipes", () => {
  it.each(CASES)("renders %s from its CSV", (figure, inputs) => {
    const output = join(outDir, `${figure}.svg`);
    render({ figure, inputs: inputs.map((f) => join(fixtures, f)), output });
    const svg = readFileSync(output, "utf8");
    expect(svg).toContain("<svg");
    expect(svg).toContain("<polyline");
    expect(svg).toContain("</svg>");
  });

  it("labels the duration axis in tau_D units", () => {
    const output = join(outDir, "fig4-label.svg");
    render({ figure: "fig4", inputs: [join(fixtures, "sweep_symmetric.csv")], output });
    const svg = readFileSync(output, "utf8");
    expect(svg).toContain("tau_ab,cd / tau_D");
    expect(svg).toContain("efficiency");
    expect(svg).toContain("output power");
  });

  it("supports asymmetric-sweep overlays on fig4", () => {
    const output = join(outDir, "fig4-multi.svg");
    const sweep = join(fixtures, "sweep_symmetric.csv");
    render({ figure: "fig4", inputs: [sweep, sweep], output });
    expect(readFileSync(output, "utf8")).toContain("stroke-dasharray");
  });

  it("is deterministic", () => {
    const a = join(outDir, "det-a.svg");
    const b = join(outDir, "det-b.svg");
    for (const output of [a, b]) {
      render({ figure: "fig3", inputs: [join(fixtures, "trajectory.csv")], output });
    }
    expect(readFileSync(a, "utf8")).toEqual(readFileSync(b, "utf8"));
  });
});

describe("schema validation", () => {
  it("fails loudly on a corrupted sweep schema, naming the column", () => {
    const text = readFileSync(join(fixtures, "sweep_symmetric.csv"), "utf8");
    const corrupted = join(outDir, "corrupted.csv");
    writeFileSync(corrupted, text.replace("bare_eta", "bare_eta_broken"));
    const output = join(outDir, "never.svg");
    expect(() => render({ figure: "fig4", inputs: [corrupted], output })).toThrowError(
      /missing required column 'bare_eta'/,
    );
    expect(existsSync(output)).toBe(false);
  });

  it("fails loudly on a corrupted trajectory schema", () => {
    const text = readFileSync(join(fixtures, "trajectory.csv"), "utf8");
    const corrupted = join(outDir, "corrupted-traj.csv");
    writeFileSync(corrupted, text.replace("t,omega,n", "t,omega,pol"));
    expect(() =>
      render({ figure: "fig3", inputs: [corrupted], output: join(outDir, "never2.svg") }),
    ).toThrowError(SchemaError);
  });

  it("rejects empty input explicitly and writes no image", () => {
    const empty = join(outDir, "empty.csv");
    writeFileSync(empty, "omega,G_cold,G_hot\n");
    const output = join(outDir, "never3.svg");
    expect(() => render({ figure: "spectrum", inputs: [empty], output })).toThrowError(
      /no data rows/,
    );
    expect(existsSync(output)).toBe(false);
  });

  it("rejects unknown figure ids", () => {
    expect(() =>
      render({
        figure: "fig9" as FigureId,
        inputs: [join(fixtures, "spectrum.csv")],
        output: join(outDir, "never4.svg"),
      }),
    ).toThrowError(/unknown figure id/);
  });
});

describe("csv parser", () => {
  it("keeps comments and parses rows", () => {
    const table = parseCsv("# config\na,b\n1,2\n3,4\n");
    expect(table.comments).toHaveLength(1);
    expect(table.columns).toEqual(["a", "b"]);
    expect(table.rows).toEqual([
      { a: "1", b: "2" },
      { a: "3", b: "4" },
    ]);
  });

  it("rejects header-less files", () => {
    expect(() => parseCsv("# only comments\n")).toThrowError(/no header/);
  });
});

describe("command line", () => {
  it("renders through the CLI entry point", () => {
    const output = join(outDir, "cli.svg");
    const code = main(["spectrum", join(fixtures, "spectrum.csv"), output]);
    expect(code).toBe(0);
    expect(existsSync(output)).toBe(true);
  });

  it("returns a schema-error exit code on corrupted input", () => {
    const empty = join(outDir, "cli-empty.csv");
    writeFileSync(empty, "omega,G_cold,G_hot\n");
    expect(main(["spectrum", empty, join(outDir, "never5.svg")])).toBe(2);
  });

  it("reports usage errors", () => {
    expect(main(["spectrum"])).toBe(2);
  });
});
