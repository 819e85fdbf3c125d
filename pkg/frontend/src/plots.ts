/**
 * The four figure generators. Each takes parsed rows and returns an SVG
 * document string; they never mutate their inputs.
 */

import {
  GAIN_COLUMNS,
  SummaryRow,
  TraceRow,
  robotIds,
  robotSeries,
} from './csv';
import {
  DEFAULT_MARGIN,
  LinearScale,
  Scene,
  extent,
  padExtent,
  seriesColor,
} from './svg';

const WIDTH = 760;
const HEIGHT = 520;

export class UnknownRobotError extends Error {
  constructor(robotId: number, validIds: number[]) {
    super(`unknown robot id ${robotId}; valid ids: ${validIds.join(', ')}`);
    this.name = 'UnknownRobotError';
  }
}

function makeScales(xDomain: [number, number], yDomain: [number, number]):
    { x: LinearScale; y: LinearScale } {
  const m = DEFAULT_MARGIN;
  return {
    x: new LinearScale(xDomain[0], xDomain[1], m.left, WIDTH - m.right),
    y: new LinearScale(yDomain[0], yDomain[1], HEIGHT - m.bottom, m.top),
  };
}

/** World-frame path of every robot; the leader (id 0) is drawn thicker
 * and each robot's final pose gets a marker. */
export function plotTrajectories(rows: TraceRow[]): string {
  const ids = robotIds(rows);
  const { x, y } = makeScales(
    padExtent(extent(rows.map((r) => r.x))),
    padExtent(extent(rows.map((r) => r.y))));
  const scene = new Scene(WIDTH, HEIGHT);
  scene.title(`Robot trajectories (${ids.length} robots)`);
  scene.axes(x, y, 'x [m]', 'y [m]');
  const legend: Array<{ label: string; color: string }> = [];
  for (const [i, id] of ids.entries()) {
    const series = robotSeries(rows, id);
    const color = id === 0 ? '#000000' : seriesColor(i);
    const label = id === 0 ? 'leader 0' : `robot ${id}`;
    scene.series(series.map((r) => [x.map(r.x), y.map(r.y)]), color, label,
      id === 0 ? 3 : 1.5);
    const last = series[series.length - 1];
    scene.circle(x.map(last.x), y.map(last.y), id === 0 ? 5 : 3.5,
      `fill="${color}" stroke="white" class="final-pose"`);
    legend.push({ label, color });
  }
  scene.legend(legend, WIDTH - DEFAULT_MARGIN.right + 15, DEFAULT_MARGIN.top);
  return scene.render();
}

/** Error norm against step for every follower; NaN samples (robots with
 * no reference yet) leave gaps in the curve. */
export function plotErrors(rows: TraceRow[]): string {
  const followers = robotIds(rows).filter((id) => id !== 0);
  const finite = rows.filter(
    (r) => r.robotId !== 0 && Number.isFinite(r.errNorm));
  const { x, y } = makeScales(
    extent(rows.map((r) => r.step)),
    padExtent(extent(finite.map((r) => r.errNorm))));
  const scene = new Scene(WIDTH, HEIGHT);
  scene.title('Tracking error norm per follower');
  scene.axes(x, y, 'step', 'error norm [m]');
  const legend: Array<{ label: string; color: string }> = [];
  for (const [i, id] of followers.entries()) {
    const color = seriesColor(i);
    scene.series(
      robotSeries(rows, id).map((r) =>
        [x.map(r.step), Number.isFinite(r.errNorm) ? y.map(r.errNorm) : NaN]),
      color, `robot ${id}`);
    legend.push({ label: `robot ${id}`, color });
  }
  scene.legend(legend, WIDTH - DEFAULT_MARGIN.right + 15, DEFAULT_MARGIN.top);
  return scene.render();
}

/** The nine controller gains of one robot against step. */
export function plotGains(rows: TraceRow[], robotId: number): string {
  const ids = robotIds(rows);
  if (!ids.includes(robotId)) throw new UnknownRobotError(robotId, ids);
  const series = robotSeries(rows, robotId);
  const all = series.flatMap((r) => r.gains);
  const { x, y } = makeScales(
    extent(series.map((r) => r.step)),
    padExtent(extent(all)));
  const scene = new Scene(WIDTH, HEIGHT);
  scene.title(`Controller gains, robot ${robotId}`);
  scene.axes(x, y, 'step', 'gain value');
  const legend: Array<{ label: string; color: string }> = [];
  for (const [g, name] of GAIN_COLUMNS.entries()) {
    const color = seriesColor(g);
    scene.series(series.map((r) => [x.map(r.step), y.map(r.gains[g])]),
      color, name);
    legend.push({ label: name, color });
  }
  scene.legend(legend, WIDTH - DEFAULT_MARGIN.right + 15, DEFAULT_MARGIN.top);
  return scene.render();
}

/** Grouped bars per population: mean convergence steps (left scale) and
 * mean post-convergence error (right scale), with stddev whiskers. */
export function plotScalability(rows: SummaryRow[]): string {
  const m = DEFAULT_MARGIN;
  const plotLeft = m.left;
  const plotRight = WIDTH - m.right;
  const plotBottom = HEIGHT - m.bottom;
  const plotTop = m.top;

  const stepsMax = Math.max(...rows.map(
    (r) => r.meanConvergenceSteps + r.stdConvergenceSteps));
  const errMax = Math.max(...rows.map(
    (r) => r.meanPostError + r.stdPostError));
  const y           = new LinearScale(0, stepsMax * 1.1, plotBottom, plotTop);
  const yErr        = new LinearScale(0, errMax * 1.1, plotBottom, plotTop);
  const x           = new LinearScale(0, rows.length, plotLeft, plotRight);

  const scene = new Scene(WIDTH, HEIGHT);
  scene.title('Scalability: convergence steps and post-convergence error');
  scene.line(plotLeft, plotBottom, plotRight, plotBottom, 'stroke="#333"');
  scene.line(plotLeft, plotBottom, plotLeft, plotTop, 'stroke="#333"');
  scene.line(plotRight, plotBottom, plotRight, plotTop, 'stroke="#333"');
  for (const t of yErr.ticks()) {
    const py = yErr.map(t);
    scene.line(plotRight, py, plotRight + 4, py, 'stroke="#333"');
    scene.text(plotRight + 7, py + 4, String(Number(t.toPrecision(4))),
      'font-size="11" text-anchor="start" fill="#333"');
  }
  for (const t of y.ticks()) {
    const py = y.map(t);
    scene.line(plotLeft - 4, py, plotLeft, py, 'stroke="#333"');
    scene.text(plotLeft - 7, py + 4, String(t),
      'font-size="11" text-anchor="end" fill="#333"');
  }
  scene.text(20, (plotBottom + plotTop) / 2, 'mean convergence steps',
    `font-size="12" text-anchor="middle" fill="#1f77b4" ` +
    `transform="rotate(-90 20 ${(plotBottom + plotTop) / 2})"`);
  scene.text(WIDTH - 16, (plotBottom + plotTop) / 2, 'mean post error [m]',
    `font-size="12" text-anchor="middle" fill="#ff7f0e" ` +
    `transform="rotate(90 ${WIDTH - 16} ${(plotBottom + plotTop) / 2})"`);
  scene.text((plotLeft + plotRight) / 2, plotBottom + 36, 'population',
    'font-size="12" text-anchor="middle" fill="#333"');

  const slot = (plotRight - plotLeft) / rows.length;
  const barWidth = slot * 0.28;
  for (const [i, row] of rows.entries()) {
    const center = x.map(i + 0.5);
    const parts: string[] = [];
    const bars: Array<[number, number, number, LinearScale, string]> = [
      [center - barWidth - 2, row.meanConvergenceSteps,
        row.stdConvergenceSteps, y, '#1f77b4'],
      [center + 2, row.meanPostError, row.stdPostError, yErr, '#ff7f0e'],
    ];
    for (const [bx, mean, std, scale, color] of bars) {
      const top = scale.map(mean);
      parts.push(`<rect x="${bx.toFixed(2)}" y="${top.toFixed(2)}" ` +
        `width="${barWidth.toFixed(2)}" ` +
        `height="${(plotBottom - top).toFixed(2)}" fill="${color}"/>`);
      const cx = bx + barWidth / 2;
      const wTop = scale.map(mean + std);
      const wBot = scale.map(Math.max(0, mean - std));
      parts.push(`<line x1="${cx.toFixed(2)}" y1="${wTop.toFixed(2)}" ` +
        `x2="${cx.toFixed(2)}" y2="${wBot.toFixed(2)}" stroke="#333"/>` +
        `<line x1="${(cx - 4).toFixed(2)}" y1="${wTop.toFixed(2)}" ` +
        `x2="${(cx + 4).toFixed(2)}" y2="${wTop.toFixed(2)}" stroke="#333"/>` +
        `<line x1="${(cx - 4).toFixed(2)}" y1="${wBot.toFixed(2)}" ` +
        `x2="${(cx + 4).toFixed(2)}" y2="${wBot.toFixed(2)}" stroke="#333"/>`);
    }
    scene.add(`<g class="bar-group" data-population="${row.population}">` +
      parts.join('') + '</g>');
    scene.text(center, plotBottom + 18, String(row.population),
      'font-size="11" text-anchor="middle" fill="#333"');
  }
  scene.legend([
    { label: 'mean convergence steps', color: '#1f77b4' },
    { label: 'mean post error', color: '#ff7f0e' },
  ], plotLeft + 10, plotTop + 10);
  return scene.render();
}
