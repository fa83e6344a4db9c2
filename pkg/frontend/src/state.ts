/**
 * The session state behind the UI: the editable grid and the live buffer.
 *
 * The grid keeps the matrix symmetric by construction (editing a cell
 * mirrors its transpose partner).  The live buffer is keyed by iteration
 * index, so replaying a book over rows already streamed merges exactly:
 * no duplicates, no lost rows.
 */

import { QuboBlock, parseHSetup, serializeHSetup } from "./csv.js";

export interface StreamRow {
  index: number;
  marginals: number[];
  energy: number;
  state: string;
}

export class GridModel {
  labels: string[];
  values: number[][];

  constructor(labels: string[], values?: number[][]) {
    if (labels.length < 2 || labels.length > 16) {
      throw new Error("grid size must be between 2 and 16");
    }
    this.labels = [...labels];
    this.values =
      values?.map((row) => [...row]) ??
      labels.map(() => labels.map(() => 0));
    if (this.values.length !== labels.length) {
      throw new Error("matrix size does not match labels");
    }
  }

  /** Symmetric edit: setting (i, j) mirrors (j, i). Rejects non-numbers. */
  set(i: number, j: number, raw: string | number): void {
    const value = typeof raw === "number" ? raw : Number(raw);
    if (typeof raw === "string" && raw.trim() === "") {
      throw new Error("empty cell");
    }
    if (Number.isNaN(value) || !Number.isFinite(value)) {
      throw new Error(`non-numeric cell value "${raw}"`);
    }
    this.values[i]![j] = value;
    this.values[j]![i] = value;
  }

  get(i: number, j: number): number {
    return this.values[i]![j]!;
  }

  get size(): number {
    return this.labels.length;
  }

  toCsv(): string {
    return serializeHSetup([{ labels: this.labels, values: this.values }]);
  }

  static fromCsv(text: string): GridModel {
    const blocks = parseHSetup(text);
    const first = blocks[0]!;
    return new GridModel(first.labels, first.values);
  }

  toBlock(): QuboBlock {
    return { labels: [...this.labels], values: this.values.map((row) => [...row]) };
  }
}

export class LiveBuffer {
  private rows = new Map<number, StreamRow>();
  noteCount = 0;

  /** Insert or overwrite by iteration index; replay is idempotent. */
  push(row: StreamRow): void {
    if (row.marginals.length > 0) {
      this.noteCount = row.marginals.length;
    }
    this.rows.set(row.index, row);
  }

  /** Merge a whole book dataset (used for replay after a reconnect). */
  replayBook(marginals: number[][], energies: number[], states: string[]): void {
    marginals.forEach((row, index) => {
      this.push({
        index,
        marginals: [...row],
        energy: energies[index]!,
        state: states[index] ?? "",
      });
    });
  }

  get length(): number {
    return this.rows.size;
  }

  /** Rows in index order; missing indices (a live gap) are skipped. */
  ordered(): StreamRow[] {
    return [...this.rows.values()].sort((a, b) => a.index - b.index);
  }

  /** Index gaps currently visible (start inclusive, end exclusive). */
  gaps(): Array<[number, number]> {
    const ordered = this.ordered();
    const out: Array<[number, number]> = [];
    for (let k = 1; k < ordered.length; k++) {
      const previous = ordered[k - 1]!.index;
      const current = ordered[k]!.index;
      if (current > previous + 1) {
        out.push([previous + 1, current]);
      }
    }
    return out;
  }

  marginalMatrix(): number[][] {
    return this.ordered().map((row) => row.marginals);
  }

  energyCurve(): number[] {
    return this.ordered().map((row) => row.energy);
  }

  clear(): void {
    this.rows.clear();
    this.noteCount = 0;
  }
}

export interface UiSessionState {
  grid: GridModel;
  live: LiveBuffer;
  selectedBookId: string | null;
  cursor: number;
  runId: string | null;
  connected: boolean;
}

export function initialState(labels: string[]): UiSessionState {
  return {
    grid: new GridModel(labels),
    live: new LiveBuffer(),
    selectedBookId: null,
    cursor: 0,
    runId: null,
    connected: false,
  };
}
