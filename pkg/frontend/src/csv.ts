/**
 * The h_setup CSV block grammar, mirrored from the session engine.
 *
 * A block is a header row `h<k>,label_1,...,label_n` followed by n rows of
 * `label_i,v_1,...,v_n`.  The diagonal carries linear coefficients; the
 * matrix is symmetrized by averaging with its transpose on parse.
 * Serialization writes floats the way the engine does (integers keep a
 * trailing `.0`), so a grid round-trips byte-identically.
 */

export interface QuboBlock {
  labels: string[];
  /** full n×n matrix: diagonal = linear terms, off-diagonal = couplings */
  values: number[][];
}

export function parseHSetup(text: string): QuboBlock[] {
  const rows = text
    .split(/\r?\n/)
    .map((line) => line.trim())
    .filter((line) => line.length > 0)
    .map((line) => line.split(",").map((cell) => cell.trim()));
  if (rows.length === 0) {
    throw new Error("empty h_setup text");
  }
  const blocks: QuboBlock[] = [];
  let pos = 0;
  while (pos < rows.length) {
    const header = rows[pos]!;
    const labels = header.slice(1);
    const n = labels.length;
    if (n === 0) {
      throw new Error(`block header "${header.join(",")}" carries no labels`);
    }
    if (blocks.length > 0 && !sameLabels(labels, blocks[0]!.labels)) {
      throw new Error(`block ${blocks.length + 1} labels differ from block 1`);
    }
    if (rows.length - (pos + 1) < n) {
      throw new Error(
        `block ${blocks.length + 1} needs ${n} rows, found ${rows.length - pos - 1}`,
      );
    }
    const matrix: number[][] = [];
    for (let i = 0; i < n; i++) {
      const row = rows[pos + 1 + i]!;
      if (row.length !== n + 1) {
        throw new Error(`row "${row.join(",")}": expected ${n + 1} cells, got ${row.length}`);
      }
      if (row[0] !== labels[i]) {
        throw new Error(`row label "${row[0]}" does not match header label "${labels[i]}"`);
      }
      matrix.push(
        row.slice(1).map((cell) => {
          const value = Number(cell);
          if (cell === "" || Number.isNaN(value)) {
            throw new Error(`non-numeric cell "${cell}" in row "${row[0]}"`);
          }
          return value;
        }),
      );
    }
    blocks.push({ labels: [...labels], values: symmetrize(matrix) });
    pos += n + 1;
  }
  return blocks;
}

export function serializeHSetup(blocks: QuboBlock[]): string {
  const lines: string[] = [];
  blocks.forEach((block, index) => {
    lines.push([`h${index + 1}`, ...block.labels].join(","));
    block.values.forEach((row, i) => {
      lines.push([block.labels[i]!, ...row.map(formatNumber)].join(","));
    });
  });
  return lines.join("\n") + "\n";
}

/** Shortest round-trip decimal, with `.0` kept on integral values. */
export function formatNumber(value: number): string {
  if (Number.isInteger(value) && Math.abs(value) < 1e16) {
    return `${value}.0`;
  }
  return String(value);
}

function symmetrize(matrix: number[][]): number[][] {
  const n = matrix.length;
  const out: number[][] = [];
  for (let i = 0; i < n; i++) {
    const row: number[] = [];
    for (let j = 0; j < n; j++) {
      row.push(0.5 * (matrix[i]![j]! + matrix[j]![i]!));
    }
    out.push(row);
  }
  return out;
}

function sameLabels(a: string[], b: string[]): boolean {
  return a.length === b.length && a.every((label, i) => label === b[i]);
}
