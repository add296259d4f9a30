import type { CandidateRow, Leg } from "./types.js";

/** Stable identity for a leg across scatter, panel and ledger. */
export function legKey(leg: Leg): string {
  return [leg.league, leg.matchday, leg.home_team, leg.away_team, leg.outcome, leg.bookmaker].join(
    "|",
  );
}

export interface ScatterOptions {
  /** Drawing size in CSS pixels. Defaults: 640 x 420. */
  width?: number;
  height?: number;
  /** Keys of candidates currently picked as legs; drawn emphasized. */
  selected?: Set<string>;
}

export interface ScatterPoint {
  x: number;
  y: number;
  key: string;
  kept: boolean;
  selected: boolean;
  row: CandidateRow;
}

export interface Tick {
  /** Position along the axis in pixels. */
  at: number;
  label: string;
}

export interface ScatterLayout {
  width: number;
  height: number;
  /** Inner plot rectangle; points always land inside it. */
  plot: { x0: number; y0: number; x1: number; y1: number };
  points: ScatterPoint[];
  xTicks: Tick[];
  yTicks: Tick[];
  empty: boolean;
}

const MARGIN = { top: 12, right: 16, bottom: 34, left: 52 };
const Y_TICK_VALUES = [1, 1.5, 2, 3, 5, 8, 13, 21, 34, 55, 89];

/**
 * Pure (prob, odds) scatter layout: probability on x, odds on a log y.
 * Kept candidates and eliminated ones carry different flags so the
 * renderer can distinguish the efficient frontier from the discarded
 * cloud, and the caller's selection set is echoed back per point.
 */
export function scatterLayout(rows: CandidateRow[], options: ScatterOptions = {}): ScatterLayout {
  const width = options.width ?? 640;
  const height = options.height ?? 420;
  const selected = options.selected ?? new Set<string>();
  const plot = {
    x0: MARGIN.left,
    y0: MARGIN.top,
    x1: width - MARGIN.right,
    y1: height - MARGIN.bottom,
  };
  if (rows.length === 0) {
    return { width, height, plot, points: [], xTicks: [], yTicks: [], empty: true };
  }

  const maxProb = Math.max(...rows.map((r) => r.prob));
  const xMax = Math.min(1, maxProb * 1.08);
  const odds = rows.map((r) => r.odds);
  const yLo = Math.log(Math.min(...odds) / 1.06);
  const yHi = Math.log(Math.max(...odds) * 1.06);
  const ySpan = yHi - yLo || 1;

  const xAt = (prob: number) => plot.x0 + (prob / xMax) * (plot.x1 - plot.x0);
  const yAt = (o: number) => plot.y1 - ((Math.log(o) - yLo) / ySpan) * (plot.y1 - plot.y0);

  const points = rows.map((row) => {
    const key = legKey(row);
    return {
      x: xAt(row.prob),
      y: yAt(row.odds),
      key,
      kept: row.kept,
      selected: selected.has(key),
      row,
    };
  });

  const xStep = xMax > 0.5 ? 0.1 : 0.05;
  const xTicks: Tick[] = [];
  for (let p = 0; p <= xMax + 1e-9; p += xStep) {
    xTicks.push({ at: xAt(p), label: p.toFixed(2) });
  }
  const yTicks: Tick[] = Y_TICK_VALUES.filter(
    (v) => Math.log(v) >= yLo && Math.log(v) <= yHi,
  ).map((v) => ({ at: yAt(v), label: String(v) }));

  return { width, height, plot, points, xTicks, yTicks, empty: false };
}

const SVG_NS = "http://www.w3.org/2000/svg";

/**
 * Materialize a layout as an SVG element. Kept points are clickable and
 * report their candidate through onPick; eliminated points are inert.
 */
export function renderScatter(
  doc: Document,
  layout: ScatterLayout,
  onPick?: (row: CandidateRow) => void,
): SVGSVGElement {
  const svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("viewBox", `0 0 ${layout.width} ${layout.height}`);
  svg.setAttribute("class", "scatter");

  if (layout.empty) {
    const note = doc.createElementNS(SVG_NS, "text");
    note.setAttribute("x", String(layout.width / 2));
    note.setAttribute("y", String(layout.height / 2));
    note.setAttribute("class", "scatter-empty");
    note.setAttribute("text-anchor", "middle");
    note.textContent = "no candidates on this matchday";
    svg.appendChild(note);
    return svg;
  }

  const axes = doc.createElementNS(SVG_NS, "g");
  axes.setAttribute("class", "axes");
  for (const tick of layout.xTicks) {
    const line = doc.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(tick.at));
    line.setAttribute("x2", String(tick.at));
    line.setAttribute("y1", String(layout.plot.y0));
    line.setAttribute("y2", String(layout.plot.y1));
    axes.appendChild(line);
    const label = doc.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(tick.at));
    label.setAttribute("y", String(layout.plot.y1 + 18));
    label.setAttribute("text-anchor", "middle");
    label.textContent = tick.label;
    axes.appendChild(label);
  }
  for (const tick of layout.yTicks) {
    const line = doc.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(layout.plot.x0));
    line.setAttribute("x2", String(layout.plot.x1));
    line.setAttribute("y1", String(tick.at));
    line.setAttribute("y2", String(tick.at));
    axes.appendChild(line);
    const label = doc.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(layout.plot.x0 - 6));
    label.setAttribute("y", String(tick.at + 4));
    label.setAttribute("text-anchor", "end");
    label.textContent = tick.label;
    axes.appendChild(label);
  }
  svg.appendChild(axes);

  for (const point of layout.points) {
    const circle = doc.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(point.x));
    circle.setAttribute("cy", String(point.y));
    circle.setAttribute("r", point.selected ? "7" : "4.5");
    const classes = [point.kept ? "kept" : "eliminated"];
    if (point.selected) {
      classes.push("selected");
    }
    circle.setAttribute("class", classes.join(" "));
    circle.setAttribute("data-key", point.key);
    const title = doc.createElementNS(SVG_NS, "title");
    const r = point.row;
    title.textContent =
      `${r.home_team} v ${r.away_team} (${r.outcome}) @ ${r.bookmaker}: ` +
      `odds ${r.odds}, prob ${r.prob}` +
      (r.dominated_by
        ? `\ndominated by ${r.dominated_by.home_team} v ${r.dominated_by.away_team} (${r.dominated_by.outcome})`
        : "");
    circle.appendChild(title);
    if (point.kept && onPick) {
      circle.addEventListener("click", () => onPick(point.row));
    }
    svg.appendChild(circle);
  }
  return svg;
}
