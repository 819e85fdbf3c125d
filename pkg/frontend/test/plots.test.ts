import { readFileSync } from 'fs';
import { join } from 'path';
import { describe, expect, it } from 'vitest';

import { SummaryRow, TraceRow, parseTrace, robotSeries } from '../src/csv';
import {
  UnknownRobotError,
  plotErrors,
  plotGains,
  plotScalability,
  plotTrajectories,
} from '../src/plots';

const GOLDEN = join(__dirname, '..', '..', 'golden');

const golden: TraceRow[] = parseTrace(
  readFileSync(join(GOLDEN, 'straight_trace.csv'), 'utf8'));

function row(step: number, robotId: number, over: Partial<TraceRow> = {}):
    TraceRow {
  return {
    step, robotId, x: 0, y: 0, theta: 0, v: 0, omega: 0,
    eX: 0, eY: 0, eTheta: 0, errNorm: 0,
    gains: [1, 2, 3, 4, 5, 6, 7, 8, 9], bestFitness: 0,
    ...over,
  };
}

function countSeries(svg: string): number {
  return svg.split('class="series"').length - 1;
}

describe('plotTrajectories', () => {
  it('renders a single stationary robot as a point marker', () => {
    const svg = plotTrajectories([row(0, 0, { x: 2, y: 3 })]);
    expect(countSeries(svg)).toBe(1);
    expect(svg).toContain('<circle');
    expect(svg).not.toContain('<polyline');
  });

  it('golden leader curve runs from (5,5) to about (5,25)', () => {
    const leader = robotSeries(golden, 0);
    // rows are recorded after integration, so step 0 is one step past (5,5)
    expect(leader[0].x).toBeCloseTo(5, 9);
    expect(Math.abs(leader[0].y - 5)).toBeLessThan(0.1);
    const last = leader[leader.length - 1];
    expect(last.x).toBeCloseTo(5, 6);
    expect(Math.abs(last.y - 25)).toBeLessThan(0.5);
    const svg = plotTrajectories(golden);
    expect(svg).toContain('data-label="leader 0"');
  });

  it('draws exactly one legend entry and curve per robot', () => {
    const svg = plotTrajectories(golden);
    expect(countSeries(svg)).toBe(11);
    expect(svg.split('class="legend-entry"').length - 1).toBe(11);
  });
});

describe('plotErrors', () => {
  it('renders flat lines for all-zero errors', () => {
    const rows = [0, 1, 2].flatMap((step) =>
      [0, 1, 2].map((id) => row(step, id)));
    const svg = plotErrors(rows);
    expect(countSeries(svg)).toBe(2);
  });

  it('golden trace: one series per follower', () => {
    expect(countSeries(plotErrors(golden))).toBe(10);
  });

  it('golden trace: every follower settles below its starting level', () => {
    for (let id = 1; id <= 10; id++) {
      const norms = robotSeries(golden, id).map((r) => r.errNorm)
        .filter((v) => Number.isFinite(v));
      const mean = (vs: number[]) =>
        vs.reduce((a, b) => a + b, 0) / vs.length;
      expect(mean(norms.slice(-100))).toBeLessThan(mean(norms.slice(0, 100)));
    }
  });

  it('does not mutate its input', () => {
    const rows = [row(0, 0), row(0, 1)];
    const copy = JSON.parse(JSON.stringify(rows));
    plotErrors(rows);
    expect(rows).toEqual(copy);
  });
});

describe('plotGains', () => {
  it('renders nine flat lines for constant gains', () => {
    const rows = [0, 1, 2].map((step) => row(step, 3));
    expect(countSeries(plotGains(rows, 3))).toBe(9);
  });

  it('golden trace, robot 2: nine series', () => {
    expect(countSeries(plotGains(golden, 2))).toBe(9);
  });

  it('rejects an unknown robot id, naming the valid ids', () => {
    expect(() => plotGains(golden, 99)).toThrowError(UnknownRobotError);
    expect(() => plotGains(golden, 99))
      .toThrowError(/unknown robot id 99; valid ids: 0, 1, 2/);
  });
});

describe('plotScalability', () => {
  const summary = (population: number, steps: number, err = 0.01):
      SummaryRow => ({
    population, runs: 10,
    meanConvergenceSteps: steps, stdConvergenceSteps: steps * 0.1,
    meanPostError: err, stdPostError: err * 0.3,
    nNotConverged: 0,
  });

  it('renders a single bar group for a one-row summary', () => {
    const svg = plotScalability([summary(5, 100)]);
    expect(svg.split('class="bar-group"').length - 1).toBe(1);
  });

  it('renders one group per population with population x-labels', () => {
    const svg = plotScalability(
      [5, 7, 9, 11].map((p, i) => summary(p, 100 + 50 * i)));
    expect(svg.split('class="bar-group"').length - 1).toBe(4);
    for (const p of [5, 7, 9, 11]) {
      expect(svg).toContain(`data-population="${p}"`);
    }
  });

  it('bar heights follow a monotone convergence-time column', () => {
    const svg = plotScalability(
      [5, 7, 9].map((p, i) => summary(p, 100 + 100 * i)));
    const heights = [...svg.matchAll(
      /<rect x="[^"]*" y="[^"]*" width="[^"]*" height="([^"]*)" fill="#1f77b4"/g,
    )].map((m) => Number(m[1]));
    expect(heights).toHaveLength(3);
    expect(heights[0]).toBeLessThan(heights[1]);
    expect(heights[1]).toBeLessThan(heights[2]);
  });
});
