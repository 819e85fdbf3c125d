import { readFileSync } from 'fs';
import { join } from 'path';
import { describe, expect, it } from 'vitest';

import {
  CsvFormatError,
  TRACE_COLUMNS,
  parseSummary,
  parseTrace,
  robotIds,
  robotSeries,
} from '../src/csv';

const GOLDEN = join(__dirname, '..', '..', 'golden');

const HEADER = TRACE_COLUMNS.join(',');

function traceLine(step: number, robotId: number, fill = '0'): string {
  return [step, robotId, ...Array(19).fill(fill)].join(',');
}

describe('parseTrace', () => {
  it('parses the golden straight trace', () => {
    const rows = parseTrace(
      readFileSync(join(GOLDEN, 'straight_trace.csv'), 'utf8'));
    expect(rows.length % 11).toBe(0);
    expect(robotIds(rows)).toEqual([0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
    const leader = robotSeries(rows, 0);
    expect(leader[0].step).toBe(0);
    expect(leader[leader.length - 1].step).toBe(leader.length - 1);
    expect(rows[0].gains).toHaveLength(9);
  });

  it('accepts nan/inf fields', () => {
    const rows = parseTrace(
      [HEADER, traceLine(0, 1, 'nan'), traceLine(1, 1, 'inf')].join('\n'));
    expect(rows[0].errNorm).toBeNaN();
    expect(rows[1].errNorm).toBe(Infinity);
  });

  it('rejects a wrong header', () => {
    expect(() => parseTrace('a,b,c\n1,2,3')).toThrowError(CsvFormatError);
    expect(() => parseTrace('a,b,c\n1,2,3')).toThrowError(/row 1/);
  });

  it('rejects a short row with its row number', () => {
    expect(() => parseTrace([HEADER, '0,1,2'].join('\n')))
      .toThrowError(/row 2: expected 21 fields/);
  });

  it('rejects a non-numeric field with its row number', () => {
    const bad = [0, 1, ...Array(18).fill('0'), 'oops'].join(',');
    expect(() => parseTrace([HEADER, traceLine(0, 1), bad].join('\n')))
      .toThrowError(/row 3: .*not a number/);
  });

  it('rejects non-contiguous steps per robot', () => {
    expect(() => parseTrace(
      [HEADER, traceLine(0, 1), traceLine(2, 1)].join('\n')))
      .toThrowError(/row 3: robot 1 step 2 breaks contiguity/);
  });

  it('rejects empty and header-only files', () => {
    expect(() => parseTrace('')).toThrowError(/empty file/);
    expect(() => parseTrace(HEADER)).toThrowError(/no data rows/);
  });
});

describe('parseSummary', () => {
  it('parses the golden scalability summary', () => {
    const rows = parseSummary(
      readFileSync(join(GOLDEN, 'scalability_summary.csv'), 'utf8'));
    expect(rows.map((r) => r.population)).toEqual([5, 7, 9, 11]);
    expect(rows.every((r) => r.runs === 10)).toBe(true);
  });

  it('rejects a wrong header', () => {
    expect(() => parseSummary('x\n1')).toThrowError(CsvFormatError);
  });

  it('rejects a fractional population with its row number', () => {
    const header = 'population,runs,mean_convergence_steps,' +
      'std_convergence_steps,mean_post_error,std_post_error,n_not_converged';
    expect(() => parseSummary([header, '5.5,10,1,1,1,1,0'].join('\n')))
      .toThrowError(/row 2: population must be an integer/);
  });
});
