/** Readers for the generator's dataset directories. */
import * as fs from 'node:fs';
import * as path from 'node:path';
import { Formula, parseQdimacs } from './qdimacs.js';

export interface Manifest {
  format: number;
  spec: Record<string, number>;
  splits: Record<string, string[]>;
  instances: Record<string, { split: string; label: string }>;
}

export type LabelRow = [string, number, number]; // bits, first score, maxsat score

export interface Labels {
  label: string;
  candidates: LabelRow[]; // bits, hardness, maxsat
  counters: LabelRow[]; // bits, core, maxsat
}

export function loadManifest(dir: string): Manifest {
  const p = path.join(dir, 'manifest.json');
  if (!fs.existsSync(p)) throw new Error(`no manifest.json in ${dir}`);
  return JSON.parse(fs.readFileSync(p, 'utf-8'));
}

export function loadFormula(dir: string, id: string): Formula {
  return parseQdimacs(fs.readFileSync(path.join(dir, `${id}.qdimacs`), 'utf-8'));
}

export function loadLabels(dir: string, id: string): Labels {
  const p = path.join(dir, `${id}.labels.json`);
  if (!fs.existsSync(p)) {
    throw new Error(`instance ${id} has no labels file (run the generator with labels)`);
  }
  return JSON.parse(fs.readFileSync(p, 'utf-8'));
}

export function splitIds(manifest: Manifest, split: string): string[] {
  const ids = manifest.splits[split];
  if (!ids) throw new Error(`unknown split ${split}`);
  return ids;
}
