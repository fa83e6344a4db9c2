/** DOM wiring: grid editor, live heatmap, energy curve, book browser. */

import { ApiClient } from "./api.js";
import { cellValue, drawEnergyCurve, drawHeatmap } from "./heatmap.js";
import { LiveView } from "./live.js";
import { GridModel } from "./state.js";

const DEFAULT_LABELS = ["c", "c#", "d", "d#", "e", "f", "f#", "g", "g#", "a", "a#", "b"];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function banner(text: string, kind: "info" | "error" = "info"): void {
  const node = el<HTMLDivElement>("banner");
  node.textContent = text;
  node.className = kind;
}

function renderGrid(grid: GridModel, container: HTMLElement, onEdit: () => void): void {
  container.innerHTML = "";
  const table = document.createElement("table");
  const head = table.insertRow();
  head.insertCell().textContent = "";
  grid.labels.forEach((label) => {
    const cell = document.createElement("th");
    cell.textContent = label;
    head.appendChild(cell);
  });
  grid.labels.forEach((label, i) => {
    const row = table.insertRow();
    const rowHead = document.createElement("th");
    rowHead.textContent = label;
    row.appendChild(rowHead);
    grid.labels.forEach((_, j) => {
      const cell = row.insertCell();
      const input = document.createElement("input");
      input.value = String(grid.get(i, j));
      input.size = 4;
      input.addEventListener("change", () => {
        try {
          grid.set(i, j, input.value);
          input.classList.remove("bad");
          renderGrid(grid, container, onEdit); // refresh the mirrored cell
          onEdit();
        } catch (error) {
          input.classList.add("bad");
          banner(String(error), "error");
        }
      });
      cell.appendChild(input);
    });
  });
  container.appendChild(table);
}

function main(): void {
  const params = new URLSearchParams(window.location.search);
  const api = new ApiClient(params.get("api") ?? "http://127.0.0.1:8765");
  let grid = new GridModel(DEFAULT_LABELS);
  const gridHost = el<HTMLDivElement>("grid");
  const heatmap = el<HTMLCanvasElement>("heatmap");
  const energy = el<HTMLCanvasElement>("energy");
  const tooltip = el<HTMLDivElement>("tooltip");
  const bookList = el<HTMLUListElement>("books");

  const live = new LiveView(api, {
    onRows: () => redraw(),
    onBook: (id) => {
      banner(`book ${id} stored`);
      void refreshBooks();
    },
    onGap: (attempt) => banner(`connection lost, retry ${attempt}…`, "error"),
    onConnected: () => banner("reconnected; replayed persisted data"),
  });

  let viewMatrix: number[][] = [];
  let viewLabels: string[] = grid.labels;

  function redraw(): void {
    viewMatrix = live.buffer.marginalMatrix();
    if (live.buffer.noteCount > 0 && viewLabels.length !== live.buffer.noteCount) {
      viewLabels = Array.from({ length: live.buffer.noteCount }, (_, k) => `q${k}`);
    }
    drawHeatmap(heatmap, { matrix: viewMatrix, labels: viewLabels }, live.cursor);
    drawEnergyCurve(energy, live.buffer.energyCurve());
  }

  heatmap.addEventListener("mousemove", (event) => {
    if (viewMatrix.length === 0) return;
    const rect = heatmap.getBoundingClientRect();
    const iteration = Math.floor(((event.clientX - rect.left) / rect.width) * viewMatrix.length);
    const noteFromTop = Math.floor(
      ((event.clientY - rect.top) / rect.height) * viewLabels.length,
    );
    const note = viewLabels.length - 1 - noteFromTop;
    try {
      const value = cellValue({ matrix: viewMatrix, labels: viewLabels }, iteration, note);
      tooltip.textContent = `iteration ${iteration}, ${viewLabels[note]}: ${value}`;
    } catch {
      tooltip.textContent = "";
    }
  });

  async function refreshBooks(): Promise<void> {
    try {
      const entries = await api.listBooks();
      bookList.innerHTML = "";
      entries.forEach((entry) => {
        const item = document.createElement("li");
        const link = document.createElement("a");
        link.textContent = `${entry.id} (${entry.created_at})`;
        link.href = "#";
        link.addEventListener("click", (clickEvent) => {
          clickEvent.preventDefault();
          void showBook(entry.id);
        });
        item.appendChild(link);
        bookList.appendChild(item);
      });
    } catch (error) {
      banner(`book list unavailable: ${error}`, "error");
    }
  }

  async function showBook(id: string): Promise<void> {
    const book = await api.getBook(id);
    if (!book) {
      banner(`book ${id} not found`, "error");
      return;
    }
    live.buffer.clear();
    live.buffer.replayBook(book.marginals, book.values, book.states);
    live.cursor = 0;
    redraw();
    banner(`showing book ${id}`);
  }

  el<HTMLButtonElement>("upload").addEventListener("click", () => {
    void (async () => {
      try {
        await api.postQubo(grid.toCsv());
        banner("QUBO uploaded");
      } catch (error) {
        banner(String(error), "error");
      }
    })();
  });

  el<HTMLButtonElement>("paste").addEventListener("click", () => {
    const text = el<HTMLTextAreaElement>("csvbox").value;
    try {
      grid = GridModel.fromCsv(text);
      renderGrid(grid, gridHost, () => undefined);
      banner("grid loaded from CSV");
    } catch (error) {
      banner(`CSV rejected: ${error}`, "error"); // no upload on bad paste
    }
  });

  el<HTMLButtonElement>("run").addEventListener("click", () => {
    void (async () => {
      try {
        live.buffer.clear();
        const id = await api.startRun();
        banner(`experiment ${id} running`);
      } catch (error) {
        banner(String(error), "error");
      }
    })();
  });

  el<HTMLButtonElement>("stop").addEventListener("click", () => {
    void api.stopSound();
    banner("stop sent");
  });

  renderGrid(grid, gridHost, () => undefined);
  void refreshBooks();
  live.start();
  void api.health().then((ok) => {
    if (!ok) banner("session API unreachable; retrying in background", "error");
  });
}

main();
