#!/usr/bin/env node
/**
 * swarmform-plot: batch figure generation from simulator trace files.
 *
 *   swarmform-plot traj        --in trace.csv   --out fig.svg
 *   swarmform-plot errors      --in trace.csv   --out fig.svg
 *   swarmform-plot gains       --in trace.csv   --out fig.svg --robot ID
 *   swarmform-plot scalability --in summary.csv --out fig.svg
 */

import { readFileSync, writeFileSync } from 'fs';
import { Command } from 'commander';

import { parseSummary, parseTrace } from './csv';
import {
  plotErrors,
  plotGains,
  plotScalability,
  plotTrajectories,
} from './plots';

function fail(message: string): never {
  process.stderr.write(`swarmform-plot: ${message}\n`);
  process.exit(2);
}

function readInput(path: string): string {
  try {
    return readFileSync(path, 'utf8');
  } catch (err) {
    fail(`cannot read ${path}: ${(err as Error).message}`);
  }
}

function writeOutput(path: string, svg: string): void {
  try {
    writeFileSync(path, svg, 'utf8');
  } catch (err) {
    fail(`cannot write ${path}: ${(err as Error).message}`);
  }
}

function runPlot(opts: { in: string; out: string; robot?: string },
                 render: (text: string, robot?: number) => string): void {
  let robot: number | undefined;
  if (opts.robot !== undefined) {
    robot = Number(opts.robot);
    if (!Number.isInteger(robot)) fail(`--robot must be an integer, got '${opts.robot}'`);
  }
  const text = readInput(opts.in);
  let svg: string;
  try {
    svg = render(text, robot);
  } catch (err) {
    fail((err as Error).message);
  }
  writeOutput(opts.out, svg);
}

const program = new Command();
program
  .name('swarmform-plot')
  .description('Generate SVG figures from swarm-simulation trace files');

function addCommand(name: string, description: string, withRobot: boolean,
                    render: (text: string, robot?: number) => string): void {
  const cmd = program.command(name).description(description)
    .requiredOption('--in <file>', 'input CSV file')
    .requiredOption('--out <file>', 'output SVG file');
  if (withRobot) cmd.requiredOption('--robot <id>', 'robot id to plot');
  cmd.action((opts: { in: string; out: string; robot?: string }) =>
    runPlot(opts, render));
}

addCommand('traj', 'world-frame trajectories with final poses', false,
  (text) => plotTrajectories(parseTrace(text)));
addCommand('errors', 'per-follower tracking-error curves', false,
  (text) => plotErrors(parseTrace(text)));
addCommand('gains', 'nine controller-gain curves for one robot', true,
  (text, robot) => plotGains(parseTrace(text), robot as number));
addCommand('scalability', 'grouped bars from a scalability summary', false,
  (text) => plotScalability(parseSummary(text)));

program.parse();
