/** HTML renderers: pure string builders over the state, so the views can
 * be asserted without a browser. */

import { AppState, displayedSelections } from "./state.js";
import { HeatmapModel, blockConfigurations, cellColor } from "./heatmap.js";
import type { ConsensusDoc } from "./api.js";

const escapeHtml = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export function renderEditor(state: AppState): string {
  const { rows, cols, grid } = state.editor;
  const header = cols.map((c) => `<th>${escapeHtml(c)}</th>`).join("");
  const body = rows
    .map((row, r) => {
      const cells = cols
        .map(
          (col, c) =>
            `<td><input data-row="${escapeHtml(row)}" data-col="${escapeHtml(col)}"` +
            ` value="${grid[r][c]}" min="0" max="1" step="0.05" type="number"></td>`,
        )
        .join("");
      return `<tr><th>${escapeHtml(row)}</th>${cells}</tr>`;
    })
    .join("");
  const note = state.editor.lastRejection
    ? `<p class="rejection">${escapeHtml(state.editor.lastRejection)}</p>`
    : "";
  return `<table><tr><th></th>${header}</tr>${body}</table>${note}`;
}

export function renderOptimum(state: AppState): string {
  const selections = displayedSelections(state);
  if (!selections) {
    return "<p>No result yet.</p>";
  }
  const cells = Object.entries(selections)
    .map(([slot, sol]) => `<td data-slot="${escapeHtml(slot)}">${escapeHtml(sol)}</td>`)
    .join("");
  const revision = state.resultRevision ?? 0;
  return `<table class="optimum" data-revision="${revision}"><tr>${cells}</tr></table>`;
}

export function renderHeatmap(model: HeatmapModel, consensus: ConsensusDoc): string {
  const rows = model.grid
    .map((line, r) => {
      const cells = line
        .map((v, c) => {
          const inBlock = model.blocks.some(
            (b) => r >= b.rowStart && r < b.rowEnd && c >= b.colStart && c < b.colEnd,
          );
          const cls = inBlock ? ' class="block"' : "";
          return `<td${cls} style="background:${cellColor(v)}" title="${v.toFixed(3)}"></td>`;
        })
        .join("");
      return `<tr><th>${escapeHtml(model.rowOrder[r])}</th>${cells}</tr>`;
    })
    .join("");
  const detail = model.blocks
    .map((b, i) => {
      const configs = blockConfigurations(consensus, b)
        .map(
          (c) =>
            `<li>${escapeHtml(c.label)}: ${c.row.map(escapeHtml).join(" ")} ` +
            `(score ${c.score.toFixed(6)})</li>`,
        )
        .join("");
      return `<details data-block="${i}"><summary>block ${i + 1}</summary><ul>${configs}</ul></details>`;
    })
    .join("");
  return `<table class="heatmap">${rows}</table>${detail}`;
}

export function renderProgress(state: AppState): string {
  if (state.running && state.currentPhase !== null) {
    return `<p>running: phase ${state.currentPhase}/4</p>`;
  }
  return state.result ? "<p>idle</p>" : "<p>not run yet</p>";
}
