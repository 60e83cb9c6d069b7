/**
 * Figure recipes: one renderer per CSV product of the simulation CLI.
 *
 *   spectrum — bath coupling spectra G(omega), cold and hot
 *   fig2     — generator rates and Lamb shifts along one cycle
 *   fig3     — polarization-frequency loop of the measured cycle
 *   fig4     — efficiency and output power vs stroke duration
 *   fig5     — relative-entropy distances vs stroke duration
 *   fig6     — per-stroke heats and net extractable work vs duration
 *
 * Column names are validated against the CLI schemas before anything is
 * drawn; a mismatch throws a SchemaError naming the missing column.
 */

import { writeFileSync } from "node:fs";
import { loadTable, numericColumn, SchemaError, type Table } from "./csv.js";
import {
  extent,
  hline,
  legend,
  linearScale,
  logScale,
  markers,
  panel,
  polyline,
  renderSvg,
  type Panel,
  type Scale,
} from "./svg.js";

export type FigureId = "spectrum" | "fig2" | "fig3" | "fig4" | "fig5" | "fig6";

export interface FigureRecipe {
  figure: FigureId;
  inputs: string[];
  output: string;
}

const WIDTH = 880;

const SWEEP_COLUMNS = [
  "tau_ab",
  "tau_cd",
  "bare_Q_ab", "bare_Q_bc", "bare_Q_cd", "bare_Q_da",
  "bare_W_extract", "bare_Q_h", "bare_P", "bare_eta",
  "eff_Q_ab", "eff_Q_bc", "eff_Q_cd", "eff_Q_da",
  "eff_W_extract", "eff_Q_h", "eff_P", "eff_eta",
  "status",
];

function makePanel(
  x: number,
  y: number,
  w: number,
  h: number,
  xScale: Scale,
  yScale: Scale,
  xLabel: string,
  yLabel: string,
  title?: string,
): Panel {
  return panel({ x, y, width: w, height: h, xScale, yScale, xLabel, yLabel, title });
}

function frame(
  x: number,
  y: number,
  w: number,
  h: number,
): { px: [number, number]; py: [number, number] } {
  return { px: [x + 64, x + w - 14], py: [y + h - 44, y + 20] };
}

/** Duration axis: the varying stroke duration of a sweep table. */
function sweepX(table: Table): number[] {
  const ta = numericColumn(table, "tau_ab");
  const tc = numericColumn(table, "tau_cd");
  const spread = (v: number[]) => Math.max(...v) - Math.min(...v);
  return spread(ta) >= spread(tc) ? ta : tc;
}

function renderSpectrum(recipe: FigureRecipe): string {
  const table = loadTable(recipe.inputs[0], ["omega", "G_cold", "G_hot"]);
  const omega = numericColumn(table, "omega");
  const cold = numericColumn(table, "G_cold");
  const hot = numericColumn(table, "G_hot");
  const { px, py } = frame(0, 0, WIDTH, 420);
  const p = makePanel(
    0, 0, WIDTH, 420,
    linearScale(extent(omega, 0), px),
    linearScale([0, extent(cold.concat(hot))[1]], py),
    "omega / omega0",
    "G(omega)",
    "bath coupling spectra",
  );
  polyline(p, omega, cold, "#1f77b4", 2);
  polyline(p, omega, hot, "#d62728", 2);
  legend(p, [["cold bath", "#1f77b4"], ["hot bath", "#d62728"]]);
  return renderSvg(WIDTH, 420, [p]);
}

function renderRates(recipe: FigureRecipe): string {
  const table = loadTable(recipe.inputs[0], [
    "t", "omega", "gamma_down", "gamma_up", "delta_R", "delta_CR",
  ]);
  const t = numericColumn(table, "t");
  const tx = extent(t, 0.02);
  const height = 640;
  const names: [string, string, string][] = [
    ["gamma_down", "transition rate down [10^-2]", "#d62728"],
    ["gamma_up", "transition rate up [10^-2]", "#1f77b4"],
    ["delta_R", "rotating Lamb shift [10^-2]", "#2ca02c"],
    ["delta_CR", "counter-rotating Lamb shift [10^-2]", "#9467bd"],
  ];
  const panels: Panel[] = [];
  names.forEach(([column, label, color], i) => {
    const col = i % 2;
    const row = Math.floor(i / 2);
    const { px, py } = frame(col * (WIDTH / 2), row * (height / 2), WIDTH / 2, height / 2);
    const values = numericColumn(table, column).map((v) => 100.0 * v);
    const p = makePanel(
      col * (WIDTH / 2), row * (height / 2), WIDTH / 2, height / 2,
      linearScale(tx, px),
      linearScale(extent(values), py),
      "t / (1/omega0)",
      label,
    );
    polyline(p, t, values, color, 1.5);
    panels.push(p);
  });
  return renderSvg(WIDTH, height, panels);
}

function renderLoop(recipe: FigureRecipe): string {
  const table = loadTable(recipe.inputs[0], ["t", "omega", "n", "p_e", "p_g"]);
  const omega = numericColumn(table, "omega");
  const n = numericColumn(table, "n");
  const { px, py } = frame(0, 0, WIDTH, 520);
  const p = makePanel(
    0, 0, WIDTH, 520,
    linearScale(extent(omega), px),
    linearScale(extent(n), py),
    "omega / omega0",
    "polarization n",
    "polarization-frequency diagram",
  );
  polyline(p, omega, n, "#1f77b4", 1.6);
  markers(p, [omega[0]], [n[0]], "#d62728", 3.5);
  return renderSvg(WIDTH, 520, [p]);
}

function renderEfficiencyPower(recipe: FigureRecipe): string {
  const height = 840;
  const styles = [
    { dash: "", width: 2.0 },       // first input: solid (symmetric)
    { dash: "8 4", width: 1.6 },    // second: long dashes (fix-ab)
    { dash: "3 3", width: 1.6 },    // third: short dashes (fix-cd)
  ];
  const tables = recipe.inputs.map((path) => loadTable(path, SWEEP_COLUMNS));
  const allTau = tables.flatMap(sweepX);
  const xdom = extent(allTau, 0);
  const fEta = frame(0, 0, WIDTH, height / 2);
  const etaVals = tables.flatMap((t) => numericColumn(t, "eff_eta").concat(numericColumn(t, "bare_eta")));
  const pEta = makePanel(
    0, 0, WIDTH, height / 2,
    logScale(xdom, fEta.px),
    linearScale(extent(etaVals.filter(Number.isFinite)), fEta.py),
    "tau_ab,cd / tau_D",
    "efficiency",
    "thick: effective Hamiltonian, thin: bare",
  );
  const fP = frame(0, height / 2, WIDTH, height / 2);
  const pVals = tables.flatMap((t) => numericColumn(t, "bare_P")).filter((v) => v > 0);
  const pPow = makePanel(
    0, height / 2, WIDTH, height / 2,
    logScale(xdom, fP.px),
    logScale(extent(pVals, 0), fP.py),
    "tau_ab,cd / tau_D",
    "output power (bare)",
  );
  tables.forEach((table, i) => {
    const x = sweepX(table);
    const s = styles[Math.min(i, styles.length - 1)];
    polyline(pEta, x, numericColumn(table, "eff_eta"), "#2ca02c", s.width + 0.8, s.dash);
    polyline(pEta, x, numericColumn(table, "bare_eta"), "#2ca02c", s.width - 0.8, s.dash);
    polyline(pPow, x, numericColumn(table, "bare_P"), "#d62728", s.width, s.dash);
  });
  return renderSvg(WIDTH, height, [pEta, pPow]);
}

function renderDistances(recipe: FigureRecipe): string {
  const table = loadTable(recipe.inputs[0], [
    "tau_ab", "tau_cd", "S_b_bstar", "S_d_dstar", "S_b_c", "S_d_a",
  ]);
  const x = sweepX(table);
  const height = 440;
  const groups: [string, string, string, string][] = [
    ["S_b_bstar", "S_d_dstar", "distance to frozen steady state", "left"],
    ["S_b_c", "S_d_a", "distance to next thermal anchor", "right"],
  ];
  const panels: Panel[] = [];
  groups.forEach(([colB, colD, title], i) => {
    const { px, py } = frame(i * (WIDTH / 2), 0, WIDTH / 2, height);
    const b = numericColumn(table, colB);
    const d = numericColumn(table, colD);
    const p = makePanel(
      i * (WIDTH / 2), 0, WIDTH / 2, height,
      logScale(extent(x, 0), px),
      linearScale(extent(b.concat(d)), py),
      "tau_ab,cd / tau_D",
      "relative entropy",
      title,
    );
    polyline(p, x, b, "#d62728", 1.8);
    polyline(p, x, d, "#1f77b4", 1.8, "6 3");
    legend(p, [["compression end point", "#d62728"], ["expansion end point", "#1f77b4"]]);
    panels.push(p);
  });
  return renderSvg(WIDTH, height, panels);
}

function renderEnergies(recipe: FigureRecipe): string {
  const table = loadTable(recipe.inputs[0], SWEEP_COLUMNS);
  const x = sweepX(table);
  const height = 460;
  const variants: [string, string][] = [["eff", "effective Hamiltonian"], ["bare", "bare Hamiltonian"]];
  const panels: Panel[] = [];
  variants.forEach(([prefix, title], i) => {
    const { px, py } = frame(i * (WIDTH / 2), 0, WIDTH / 2, height);
    const series: [string, string, number, string][] = [
      [`${prefix}_Q_ab`, "#d62728", 2.2, "8 4"],
      [`${prefix}_Q_bc`, "#1f77b4", 1.2, ""],
      [`${prefix}_Q_cd`, "#1f77b4", 1.2, "6 3"],
      [`${prefix}_Q_da`, "#d62728", 2.2, ""],
      [`${prefix}_W_extract`, "#000000", 1.8, ""],
    ];
    const values = series.flatMap(([c]) => numericColumn(table, c));
    const p = makePanel(
      i * (WIDTH / 2), 0, WIDTH / 2, height,
      logScale(extent(x, 0), px),
      linearScale(extent(values), py),
      "tau_ab,cd / tau_D",
      "heat / work per cycle",
      title,
    );
    hline(p, 0, "#999");
    for (const [column, color, width, dash] of series) {
      polyline(p, x, numericColumn(table, column), color, width, dash);
    }
    panels.push(p);
  });
  return renderSvg(WIDTH, height, panels);
}

const RENDERERS: Record<FigureId, (recipe: FigureRecipe) => string> = {
  spectrum: renderSpectrum,
  fig2: renderRates,
  fig3: renderLoop,
  fig4: renderEfficiencyPower,
  fig5: renderDistances,
  fig6: renderEnergies,
};

export function render(recipe: FigureRecipe): string {
  const renderer = RENDERERS[recipe.figure];
  if (!renderer) {
    throw new SchemaError(
      `unknown figure id '${recipe.figure}' (expected one of ${Object.keys(RENDERERS).join(", ")})`,
    );
  }
  if (recipe.inputs.length === 0) {
    throw new SchemaError("recipe has no input CSVs");
  }
  const svg = renderer(recipe);
  writeFileSync(recipe.output, svg);
  return recipe.output;
}
