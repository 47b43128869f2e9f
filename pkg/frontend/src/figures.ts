/**
 * One renderer per figure family. Every renderer consumes a parsed CSV
 * table (no recomputation of simulation results) and returns a complete
 * SVG document string.
 */

import { CsvError, Table, distinct, numbers, requireColumns } from "./csv.js";
import {
  DEFAULT_FRAME,
  PALETTE,
  SvgChart,
  extent,
  linearScale,
  linearTicks,
  logScale,
  logTicks,
} from "./svg.js";

export interface FigureSpec {
  id: string;
  title: string;
  columns: string[];
  render: (table: Table) => string;
}

const ADVANTAGE_REFERENCE_LOG2 = -32;

function groupBy(table: Table, column: string): Map<string, Record<string, string>[]> {
  const out = new Map<string, Record<string, string>[]>();
  for (const row of table.rows) {
    const key = row[column];
    if (!out.has(key)) out.set(key, []);
    out.get(key)!.push(row);
  }
  return out;
}

function num(row: Record<string, string>, column: string): number {
  const v = Number(row[column]);
  if (!Number.isFinite(v)) throw new CsvError(`non-numeric cell in '${column}': ${row[column]}`);
  return v;
}

function renderInterference(table: Table): string {
  requireColumns(table, ["interference_count", "mean", "var_median", "var_p001"]);
  const mean = numbers(table, "mean");
  const median = numbers(table, "var_median");
  const p001 = numbers(table, "var_p001");
  const chart = new SvgChart();
  const x = linearScale([0, 1], [chart.plotLeft, chart.plotRight]);
  const y = linearScale([0, 1.05], [chart.plotBottom, chart.plotTop]);
  chart.title("Continued interference: error variance vs granted mean");
  chart.line(mean.map((m, i) => [x(m), y(median[i])]), PALETTE[0], 2);
  chart.line(mean.map((m, i) => [x(m), y(p001[i])]), PALETTE[1], 1.5, "6 4");
  chart.line([[x(0), y(1)], [x(1), y(1)]], "#999999", 1, "2 3");
  chart.xAxis(x, linearTicks([0, 1], 5), "granted symbol-aggregate mean (fraction of frame)");
  chart.yAxis(y, linearTicks([0, 1], 5), "normalized residual variance");
  chart.legend([["median", PALETTE[0]], ["0.1th percentile", PALETTE[1]]], ["", "6 4"]);
  return chart.render();
}

function renderNppbMap(table: Table): string {
  requireColumns(table, ["distance_m", "target_ber", "n_ppb"]);
  const d = numbers(table, "distance_m");
  const n = numbers(table, "n_ppb");
  const chart = new SvgChart();
  const x = logScale([Math.min(...d), Math.max(...d)], [chart.plotLeft, chart.plotRight]);
  const y = logScale([1, Math.max(...n) * 1.3], [chart.plotBottom, chart.plotTop]);
  chart.title("Pulses per bit required over distance");
  const groups = [...groupBy(table, "target_ber").entries()];
  groups.forEach(([ber, rows], i) => {
    const pts = rows
      .map((r): [number, number] => [num(r, "distance_m"), Math.max(1, num(r, "n_ppb"))])
      .sort((a, b) => a[0] - b[0])
      .map(([dv, nv]): [number, number] => [x(dv), y(nv)]);
    chart.line(pts, PALETTE[i % PALETTE.length], 2);
  });
  chart.xAxis(x, logTicks([Math.min(...d), Math.max(...d)]), "distance (m)");
  chart.yAxis(y, logTicks([1, Math.max(...n) * 1.3]), "pulses per bit");
  chart.legend(groups.map(([ber], i): [string, string] =>
    [`target BER ${ber}`, PALETTE[i % PALETTE.length]]));
  return chart.render();
}

function renderDistortionStats(table: Table): string {
  requireColumns(table, ["distance_m", "mu_lgt", "sigma_lgt", "threshold", "mu_att", "sigma_att"]);
  const d = numbers(table, "distance_m");
  const chart = new SvgChart();
  const x = logScale([Math.min(...d), Math.max(...d)], [chart.plotLeft, chart.plotRight]);
  const y = linearScale([0, 1.05], [chart.plotBottom, chart.plotTop]);
  chart.title("Distortion statistics over distance");
  const sorted = [...table.rows].sort((a, b) => num(a, "distance_m") - num(b, "distance_m"));
  const curve = (mu: string, sig: string, k: number): Array<[number, number]> =>
    sorted.map((r): [number, number] =>
      [x(num(r, "distance_m")), y(num(r, mu) + k * num(r, sig))]);
  chart.line(curve("mu_lgt", "sigma_lgt", 0), PALETTE[0], 2);
  chart.line(curve("mu_lgt", "sigma_lgt", 1), PALETTE[0], 1, "3 3");
  chart.line(curve("mu_lgt", "sigma_lgt", -1), PALETTE[0], 1, "3 3");
  chart.line(curve("mu_att", "sigma_att", 0), PALETTE[1], 2);
  chart.line(curve("mu_att", "sigma_att", 1), PALETTE[1], 1, "3 3");
  chart.line(curve("mu_att", "sigma_att", -1), PALETTE[1], 1, "3 3");
  chart.line(sorted.map((r): [number, number] =>
    [x(num(r, "distance_m")), y(num(r, "threshold"))]), PALETTE[2], 2, "8 4");
  chart.xAxis(x, logTicks([Math.min(...d), Math.max(...d)]), "distance (m)");
  chart.yAxis(y, linearTicks([0, 1], 5), "distortion");
  chart.legend(
    [["legitimate (mean, +/-sd)", PALETTE[0]], ["attack (mean, +/-sd)", PALETTE[1]],
     ["decision threshold", PALETTE[2]]],
    ["", "", "8 4"]);
  return chart.render();
}

function renderRegion(table: Table): string {
  requireColumns(table, ["distance_m", "target_ber", "advantage_log2", "bit_equivalent"]);
  const d = numbers(table, "distance_m");
  const adv = numbers(table, "advantage_log2");
  const chart = new SvgChart();
  const x = logScale([Math.min(...d), Math.max(...d)], [chart.plotLeft, chart.plotRight]);
  const yLo = Math.max(Math.min(...adv), -200);
  const y = linearScale([yLo, Math.max(...adv, 0) + 5], [chart.plotBottom, chart.plotTop]);
  chart.title("Attacker advantage over the performance region");

  // shade the region where every BER column keeps bit-equivalent security
  const byDistance = groupBy(table, "distance_m");
  const secure = [...byDistance.entries()]
    .filter(([, rows]) => rows.every((r) => r.bit_equivalent === "1"))
    .map(([dv]) => Number(dv));
  if (secure.length > 0) {
    const hi = Math.max(...secure);
    chart.rect(chart.plotLeft, chart.plotTop, x(hi) - chart.plotLeft,
               chart.plotBottom - chart.plotTop, "#3a8f5d", 0.08);
  }

  const groups = [...groupBy(table, "target_ber").entries()];
  groups.forEach(([ber, rows], i) => {
    const pts = rows
      .map((r): [number, number] => [num(r, "distance_m"), Math.max(num(r, "advantage_log2"), yLo)])
      .sort((a, b) => a[0] - b[0])
      .map(([dv, av]): [number, number] => [x(dv), y(av)]);
    chart.line(pts, PALETTE[i % PALETTE.length], 2);
  });
  const ref = y(ADVANTAGE_REFERENCE_LOG2);
  chart.line([[chart.plotLeft, ref], [chart.plotRight, ref]], "#000000", 1, "5 4");
  chart.text(chart.plotLeft + 6, ref - 4, "bit-equivalent level 2^-32", "start", 10);
  chart.xAxis(x, logTicks([Math.min(...d), Math.max(...d)]), "distance (m)");
  chart.yAxis(y, linearTicks([yLo, Math.max(...adv, 0) + 5], 6), "log2 advantage");
  chart.legend(groups.map(([ber], i): [string, string] =>
    [`target BER ${ber}`, PALETTE[i % PALETTE.length]]));
  return chart.render();
}

function renderQq(table: Table): string {
  requireColumns(table, ["kind", "theoretical_quantile", "empirical_quantile",
                         "central_correlation"]);
  const kinds = distinct(table, "kind");
  const chart = new SvgChart({ ...DEFAULT_FRAME, width: 340 * kinds.length + 40 });
  chart.title("Distortion quantiles against the normal model");
  kinds.forEach((kind, k) => {
    const rows = table.rows.filter((r) => r.kind === kind);
    const left = 64 + k * 340;
    const right = left + 270;
    const theo = rows.map((r) => num(r, "theoretical_quantile"));
    const lim = Math.max(4, ...theo.map(Math.abs));
    const x = linearScale([-lim, lim], [left, right]);
    const y = linearScale([-lim, lim], [chart.plotBottom, chart.plotTop]);
    chart.line([[x(-lim), y(-lim)], [x(lim), y(lim)]], "#999999", 1, "4 3");
    for (const r of rows) {
      chart.circle(x(num(r, "theoretical_quantile")), y(num(r, "empirical_quantile")),
                   1.2, PALETTE[k % PALETTE.length]);
    }
    const corr = rows.length ? rows[0].central_correlation : "";
    chart.text((left + right) / 2, chart.plotBottom + 18,
               `${kind} (central r = ${Number(corr).toPrecision(4)})`, "middle", 11);
    chart.raw(`<line x1="${left}" y1="${chart.plotBottom}" x2="${right}" ` +
              `y2="${chart.plotBottom}" stroke="black"/>`);
  });
  chart.text(chart.frame.width / 2, chart.frame.height - 10,
             "theoretical quantile vs standardized empirical quantile", "middle", 12);
  return chart.render();
}

function renderFramelen(table: Table): string {
  requireColumns(table, ["n_b", "advantage_log2"]);
  const nb = numbers(table, "n_b");
  const adv = numbers(table, "advantage_log2");
  const chart = new SvgChart();
  const x = linearScale([0, Math.max(...nb) * 1.05], [chart.plotLeft, chart.plotRight]);
  const lo = Math.min(...adv, -Math.max(...nb)) - 10;
  const y = linearScale([lo, 0], [chart.plotBottom, chart.plotTop]);
  chart.title("Advantage decay with frame length");
  const pts = nb.map((n, i): [number, number] => [n, adv[i]])
    .sort((a, b) => a[0] - b[0]);
  chart.line(pts.map(([n, a]): [number, number] => [x(n), y(a)]), PALETTE[0], 2);
  pts.forEach(([n, a]) => chart.circle(x(n), y(a), 3, PALETTE[0]));
  // bit-equivalence reference 2^-n_b
  chart.line([[x(0), y(0)], [x(Math.max(...nb)), y(-Math.max(...nb))]], "#000000", 1, "5 4");
  chart.text(x(Math.max(...nb) * 0.6), y(-Math.max(...nb) * 0.6) - 6, "2^-n_b", "start", 10);
  chart.xAxis(x, linearTicks([0, Math.max(...nb)], 6), "bits per frame");
  chart.yAxis(y, linearTicks([lo, 0], 6), "log2 advantage");
  return chart.render();
}

function renderProjection(table: Table): string {
  requireColumns(table, ["n_b", "mode", "p_win"]);
  const nb = numbers(table, "n_b");
  const chart = new SvgChart();
  const x = linearScale([0, Math.max(...nb) * 1.05], [chart.plotLeft, chart.plotRight]);
  const logs = table.rows.map((r) => Math.log10(Math.max(num(r, "p_win"), 1e-60)));
  const y = linearScale([Math.min(...logs) - 2, 0], [chart.plotBottom, chart.plotTop]);
  chart.title("Hidden-check win probability vs frame length");
  const groups = [...groupBy(table, "mode").entries()];
  groups.forEach(([mode, rows], i) => {
    const pts = rows
      .map((r): [number, number] =>
        [num(r, "n_b"), Math.log10(Math.max(num(r, "p_win"), 1e-60))])
      .sort((a, b) => a[0] - b[0]);
    chart.line(pts.map(([n, p]): [number, number] => [x(n), y(p)]),
               PALETTE[i % PALETTE.length], 2);
    pts.forEach(([n, p]) => chart.circle(x(n), y(p), 3, PALETTE[i % PALETTE.length]));
  });
  const ref = y(Math.log10(Math.pow(2, ADVANTAGE_REFERENCE_LOG2)));
  chart.line([[chart.plotLeft, ref], [chart.plotRight, ref]], "#000000", 1, "5 4");
  chart.text(chart.plotLeft + 6, ref - 4, "2^-32", "start", 10);
  chart.xAxis(x, linearTicks([0, Math.max(...nb)], 6), "bits per frame");
  chart.yAxis(y, linearTicks([Math.min(...logs) - 2, 0], 6), "log10 win probability");
  chart.legend(groups.map(([mode], i): [string, string] =>
    [`${mode} checks`, PALETTE[i % PALETTE.length]]));
  return chart.render();
}

function renderBerSweep(table: Table): string {
  requireColumns(table, ["n_ppb", "snr_per_pulse_db", "ber_mc", "ber_model"]);
  const chart = new SvgChart();
  const snr = numbers(table, "snr_per_pulse_db");
  const x = linearScale(extent(snr), [chart.plotLeft, chart.plotRight]);
  const floor = 1e-7;
  const logs = table.rows.flatMap((r) => [
    Math.log10(Math.max(num(r, "ber_mc"), floor)),
    Math.log10(Math.max(num(r, "ber_model"), floor)),
  ]);
  const y = linearScale([Math.min(...logs) - 0.5, 0], [chart.plotBottom, chart.plotTop]);
  chart.title("Measured vs modeled bit error rate");
  const groups = [...groupBy(table, "n_ppb").entries()];
  groups.forEach(([n, rows], i) => {
    const color = PALETTE[i % PALETTE.length];
    const sorted = [...rows].sort((a, b) => num(a, "snr_per_pulse_db") - num(b, "snr_per_pulse_db"));
    chart.line(sorted.map((r): [number, number] =>
      [x(num(r, "snr_per_pulse_db")),
       y(Math.log10(Math.max(num(r, "ber_model"), floor)))]), color, 1.5);
    sorted.forEach((r) => chart.circle(
      x(num(r, "snr_per_pulse_db")),
      y(Math.log10(Math.max(num(r, "ber_mc"), floor))), 3.5, color));
  });
  chart.xAxis(x, linearTicks(extent(snr), 6), "per-pulse SNR (dB)");
  chart.yAxis(y, linearTicks([Math.min(...logs) - 0.5, 0], 6), "log10 BER");
  chart.legend(groups.map(([n], i): [string, string] =>
    [`n_ppb = ${n}`, PALETTE[i % PALETTE.length]]));
  return chart.render();
}

function renderSanov(table: Table): string {
  requireColumns(table, ["target_bits", "t_ber", "n_p", "sanov_advantage_log2",
                         "exact_advantage_log2"]);
  const chart = new SvgChart();
  chart.title("Single-pulse baseline: guessing advantage");
  const row = table.rows[0];
  const bars: Array<[string, number]> = [
    ["Sanov estimate", num(row, "sanov_advantage_log2")],
    ["exact binomial", num(row, "exact_advantage_log2")],
  ];
  const lo = Math.min(...bars.map(([, v]) => v), -num(row, "target_bits")) - 6;
  const y = linearScale([lo, 0], [chart.plotBottom, chart.plotTop]);
  const slot = (chart.plotRight - chart.plotLeft) / bars.length;
  bars.forEach(([label, v], i) => {
    const cx = chart.plotLeft + slot * (i + 0.5);
    chart.rect(cx - 40, y(v), 80, chart.plotBottom - y(v), PALETTE[i], 0.8);
    chart.text(cx, chart.plotBottom + 16, label, "middle", 11);
    chart.text(cx, y(v) - 5, `2^${Number(row[i === 0 ? "sanov_advantage_log2" : "exact_advantage_log2"]).toFixed(1)}`, "middle", 10);
  });
  const ref = y(-num(row, "target_bits"));
  chart.line([[chart.plotLeft, ref], [chart.plotRight, ref]], "#000000", 1, "5 4");
  chart.text(chart.plotLeft + 6, ref - 4,
             `target 2^-${row.target_bits} at n_p = ${row.n_p}, tolerance ${row.t_ber}`,
             "start", 10);
  chart.yAxis(y, linearTicks([lo, 0], 6), "log2 advantage");
  return chart.render();
}

function renderGameSummary(title: string): (table: Table) => string {
  return (table: Table) => {
    requireColumns(table, ["trials", "wins", "win_rate"]);
    const chart = new SvgChart();
    chart.title(title);
    const row = table.rows[0];
    const rate = num(row, "win_rate");
    const y = linearScale([0, 1], [chart.plotBottom, chart.plotTop]);
    const cx = (chart.plotLeft + chart.plotRight) / 2;
    chart.rect(cx - 60, y(Math.max(rate, 1e-3)), 120,
               chart.plotBottom - y(Math.max(rate, 1e-3)), PALETTE[0], 0.8);
    chart.text(cx, y(Math.max(rate, 1e-3)) - 6,
               `${row.wins}/${row.trials} wins (rate ${rate})`, "middle", 11);
    chart.yAxis(y, linearTicks([0, 1], 5), "win rate");
    return chart.render();
  };
}

export const FIGURES: Record<string, FigureSpec> = {
  "fig7-interference": {
    id: "fig7-interference",
    title: "continued interference curves",
    columns: ["interference_count", "mean", "var_median", "var_p001"],
    render: renderInterference,
  },
  "fig8-nppb": {
    id: "fig8-nppb",
    title: "symbol-length map",
    columns: ["distance_m", "target_ber", "n_ppb"],
    render: renderNppbMap,
  },
  "fig9-distortion": {
    id: "fig9-distortion",
    title: "distortion vs distance with threshold",
    columns: ["distance_m", "mu_lgt", "sigma_lgt", "threshold", "mu_att", "sigma_att"],
    render: renderDistortionStats,
  },
  "fig10-region": {
    id: "fig10-region",
    title: "advantage/region map",
    columns: ["distance_m", "target_ber", "advantage_log2", "bit_equivalent"],
    render: renderRegion,
  },
  "qq-grid": {
    id: "qq-grid",
    title: "QQ validation grid",
    columns: ["kind", "theoretical_quantile", "empirical_quantile", "central_correlation"],
    render: renderQq,
  },
  "fig16-framelen": {
    id: "fig16-framelen",
    title: "frame-length decay",
    columns: ["n_b", "advantage_log2"],
    render: renderFramelen,
  },
  "pwin-projection": {
    id: "pwin-projection",
    title: "projection-check win curves",
    columns: ["n_b", "mode", "p_win"],
    render: renderProjection,
  },
  "ber-fidelity": {
    id: "ber-fidelity",
    title: "BER sweep",
    columns: ["n_ppb", "snr_per_pulse_db", "ber_mc", "ber_model"],
    render: renderBerSweep,
  },
  "sanov-baseline": {
    id: "sanov-baseline",
    title: "single-pulse baseline",
    columns: ["target_bits", "t_ber", "n_p", "sanov_advantage_log2", "exact_advantage_log2"],
    render: renderSanov,
  },
  "game-a-summary": {
    id: "game-a-summary",
    title: "advancement game summary",
    columns: ["trials", "wins", "win_rate"],
    render: renderGameSummary("Advancement game: unbiased guesser"),
  },
  "game-d-summary": {
    id: "game-d-summary",
    title: "delay game summary",
    columns: ["trials", "wins", "win_rate"],
    render: renderGameSummary("Delay game: unbiased annihilator"),
  },
};

/** CSV base-name prefixes mapped to their figure family. */
export const FILE_FIGURE_MAP: Array<[RegExp, string]> = [
  [/^ber_sweep/, "ber-fidelity"],
  [/^nppb_map/, "fig8-nppb"],
  [/^distortion_stats/, "fig9-distortion"],
  [/^region/, "fig10-region"],
  [/^framelen/, "fig16-framelen"],
  [/^qq/, "qq-grid"],
  [/^continued_interference/, "fig7-interference"],
  [/^projection/, "pwin-projection"],
  [/^sanov/, "sanov-baseline"],
  [/^game_a/, "game-a-summary"],
  [/^game_d/, "game-d-summary"],
];

export function figureForFile(baseName: string): string | null {
  for (const [pattern, id] of FILE_FIGURE_MAP) {
    if (pattern.test(baseName)) return id;
  }
  return null;
}
