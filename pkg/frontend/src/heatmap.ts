/**
 * Heatmap rendering of marginal streams: iterations × notes, color = value.
 *
 * Cell values stay exact: the drawing layer reads them through cellValue,
 * which is also what the tooltip shows, so nothing downstream depends on
 * the color mapping.
 */

export interface HeatmapData {
  /** rows = iterations, columns = notes; values in [0, 1] */
  matrix: number[][];
  labels: string[];
}

/** The exact stored value for a cell (tooltip + tests read this). */
export function cellValue(data: HeatmapData, iteration: number, note: number): number {
  const row = data.matrix[iteration];
  if (row === undefined || row[note] === undefined) {
    throw new Error(`no cell (${iteration}, ${note})`);
  }
  return row[note]!;
}

// dark-to-bright perceptual ramp (magma-like anchor points)
const RAMP: Array<[number, [number, number, number]]> = [
  [0.0, [0, 0, 4]],
  [0.25, [81, 18, 124]],
  [0.5, [183, 55, 121]],
  [0.75, [252, 137, 97]],
  [1.0, [252, 253, 191]],
];

export function colorFor(value: number): [number, number, number] {
  const v = Math.min(1, Math.max(0, value));
  for (let k = 1; k < RAMP.length; k++) {
    const [hiPos, hiColor] = RAMP[k]!;
    if (v <= hiPos) {
      const [loPos, loColor] = RAMP[k - 1]!;
      const t = (v - loPos) / (hiPos - loPos);
      return [
        Math.round(loColor[0] + t * (hiColor[0] - loColor[0])),
        Math.round(loColor[1] + t * (hiColor[1] - loColor[1])),
        Math.round(loColor[2] + t * (hiColor[2] - loColor[2])),
      ];
    }
  }
  return RAMP[RAMP.length - 1]![1];
}

export function drawHeatmap(
  canvas: HTMLCanvasElement,
  data: HeatmapData,
  cursor: number | null,
): void {
  const context = canvas.getContext("2d");
  if (!context) return;
  const rows = data.matrix.length;
  const notes = data.labels.length;
  context.clearRect(0, 0, canvas.width, canvas.height);
  if (rows === 0 || notes === 0) return;
  const cellW = canvas.width / rows;
  const cellH = canvas.height / notes;
  for (let i = 0; i < rows; i++) {
    const row = data.matrix[i]!;
    for (let j = 0; j < notes; j++) {
      const [r, g, b] = colorFor(row[j] ?? 0);
      context.fillStyle = `rgb(${r},${g},${b})`;
      // note 0 at the bottom, mirroring the session's figure convention
      context.fillRect(i * cellW, (notes - 1 - j) * cellH, Math.ceil(cellW), Math.ceil(cellH));
    }
  }
  if (cursor !== null && cursor >= 0 && cursor < rows) {
    context.strokeStyle = "rgba(255,255,255,0.9)";
    context.lineWidth = 1;
    context.beginPath();
    context.moveTo((cursor + 0.5) * cellW, 0);
    context.lineTo((cursor + 0.5) * cellW, canvas.height);
    context.stroke();
  }
}

export function drawEnergyCurve(canvas: HTMLCanvasElement, energies: number[]): void {
  const context = canvas.getContext("2d");
  if (!context) return;
  context.clearRect(0, 0, canvas.width, canvas.height);
  if (energies.length < 2) return;
  const lo = Math.min(...energies);
  const hi = Math.max(...energies);
  const span = hi > lo ? hi - lo : 1;
  context.strokeStyle = "#7cc4ff";
  context.lineWidth = 1.5;
  context.beginPath();
  energies.forEach((value, index) => {
    const x = (index / (energies.length - 1)) * canvas.width;
    const y = canvas.height - ((value - lo) / span) * (canvas.height - 4) - 2;
    if (index === 0) context.moveTo(x, y);
    else context.lineTo(x, y);
  });
  context.stroke();
}
