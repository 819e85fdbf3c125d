/**
 * Strict CSV readers for the simulator's two external file formats: the
 * per-run trace and the scalability summary. Malformed input is rejected
 * with the offending 1-based row number in the error message.
 */

export const TRACE_COLUMNS = [
  'step', 'robot_id', 'x', 'y', 'theta', 'v', 'omega',
  'e_x', 'e_y', 'e_theta', 'err_norm',
  'kx_p', 'kx_i', 'kx_d', 'ky_p', 'ky_i', 'ky_d', 'kth_p', 'kth_i', 'kth_d',
  'best_fitness',
] as const;

export const SUMMARY_COLUMNS = [
  'population', 'runs', 'mean_convergence_steps', 'std_convergence_steps',
  'mean_post_error', 'std_post_error', 'n_not_converged',
] as const;

export const GAIN_COLUMNS = [
  'kx_p', 'kx_i', 'kx_d', 'ky_p', 'ky_i', 'ky_d', 'kth_p', 'kth_i', 'kth_d',
] as const;

export interface TraceRow {
  step: number;
  robotId: number;
  x: number;
  y: number;
  theta: number;
  v: number;
  omega: number;
  eX: number;
  eY: number;
  eTheta: number;
  errNorm: number;
  gains: number[];          // the nine gain columns, in schema order
  bestFitness: number;
}

export interface SummaryRow {
  population: number;
  runs: number;
  meanConvergenceSteps: number;
  stdConvergenceSteps: number;
  meanPostError: number;
  stdPostError: number;
  nNotConverged: number;
}

export class CsvFormatError extends Error {
  constructor(message: string, readonly row: number) {
    super(`row ${row}: ${message}`);
    this.name = 'CsvFormatError';
  }
}

function splitLines(text: string): string[] {
  const lines = text.split(/\r?\n/);
  while (lines.length > 0 && lines[lines.length - 1] === '') lines.pop();
  return lines;
}

function parseNumber(field: string, name: string, row: number): number {
  // The writer emits %.9g floats plus "nan"/"inf" for undefined errors.
  if (field === 'nan') return NaN;
  if (field === 'inf') return Infinity;
  if (field === '-inf') return -Infinity;
  const value = Number(field);
  if (field === '' || Number.isNaN(value)) {
    throw new CsvFormatError(`${name} is not a number: '${field}'`, row);
  }
  return value;
}

function parseInteger(field: string, name: string, row: number): number {
  const value = parseNumber(field, name, row);
  if (!Number.isInteger(value)) {
    throw new CsvFormatError(`${name} must be an integer, got '${field}'`, row);
  }
  return value;
}

/** Parse a trace CSV; validates the header, every row's shape and types,
 * and that step indices are contiguous from 0 per robot. */
export function parseTrace(text: string): TraceRow[] {
  const lines = splitLines(text);
  if (lines.length === 0) throw new CsvFormatError('empty file', 1);
  if (lines[0] !== TRACE_COLUMNS.join(',')) {
    throw new CsvFormatError(
      `header does not match the trace schema (${TRACE_COLUMNS.length} ` +
      'columns expected)', 1);
  }
  const rows: TraceRow[] = [];
  const lastStep = new Map<number, number>();
  for (let i = 1; i < lines.length; i++) {
    const rowNum = i + 1;
    const fields = lines[i].split(',');
    if (fields.length !== TRACE_COLUMNS.length) {
      throw new CsvFormatError(
        `expected ${TRACE_COLUMNS.length} fields, got ${fields.length}`,
        rowNum);
    }
    const step = parseInteger(fields[0], 'step', rowNum);
    const robotId = parseInteger(fields[1], 'robot_id', rowNum);
    const nums = fields.slice(2).map(
      (f, j) => parseNumber(f, TRACE_COLUMNS[j + 2], rowNum));
    const prev = lastStep.get(robotId);
    const expected = prev === undefined ? 0 : prev + 1;
    if (step !== expected) {
      throw new CsvFormatError(
        `robot ${robotId} step ${step} breaks contiguity (expected ` +
        `${expected})`, rowNum);
    }
    lastStep.set(robotId, step);
    rows.push({
      step, robotId,
      x: nums[0], y: nums[1], theta: nums[2], v: nums[3], omega: nums[4],
      eX: nums[5], eY: nums[6], eTheta: nums[7], errNorm: nums[8],
      gains: nums.slice(9, 18),
      bestFitness: nums[18],
    });
  }
  if (rows.length === 0) throw new CsvFormatError('no data rows', 2);
  return rows;
}

/** Parse a scalability summary CSV. */
export function parseSummary(text: string): SummaryRow[] {
  const lines = splitLines(text);
  if (lines.length === 0) throw new CsvFormatError('empty file', 1);
  if (lines[0] !== SUMMARY_COLUMNS.join(',')) {
    throw new CsvFormatError('header does not match the summary schema', 1);
  }
  const rows: SummaryRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const rowNum = i + 1;
    const fields = lines[i].split(',');
    if (fields.length !== SUMMARY_COLUMNS.length) {
      throw new CsvFormatError(
        `expected ${SUMMARY_COLUMNS.length} fields, got ${fields.length}`,
        rowNum);
    }
    rows.push({
      population: parseInteger(fields[0], 'population', rowNum),
      runs: parseInteger(fields[1], 'runs', rowNum),
      meanConvergenceSteps: parseNumber(fields[2], 'mean_convergence_steps', rowNum),
      stdConvergenceSteps: parseNumber(fields[3], 'std_convergence_steps', rowNum),
      meanPostError: parseNumber(fields[4], 'mean_post_error', rowNum),
      stdPostError: parseNumber(fields[5], 'std_post_error', rowNum),
      nNotConverged: parseInteger(fields[6], 'n_not_converged', rowNum),
    });
  }
  if (rows.length === 0) throw new CsvFormatError('no data rows', 2);
  return rows;
}

/** Distinct robot ids in first-appearance order. */
export function robotIds(rows: TraceRow[]): number[] {
  const seen: number[] = [];
  for (const row of rows) {
    if (!seen.includes(row.robotId)) seen.push(row.robotId);
  }
  return seen;
}

/** All rows of one robot, in step order. */
export function robotSeries(rows: TraceRow[], robotId: number): TraceRow[] {
  return rows.filter((r) => r.robotId === robotId);
}
