/** Consensus heatmap model: the solution-vs-configuration affinity matrix
 * permuted so every consensus group is a contiguous diagonal block. Pure
 * data out; the DOM layer just paints it.
 */

import type { ConsensusDoc } from "./api.js";

export interface BlockSpan {
  rowStart: number;
  rowEnd: number; // half-open
  colStart: number;
  colEnd: number; // half-open
  /** configuration labels inside the block */
  configs: string[];
}

export interface HeatmapModel {
  rowOrder: string[];
  colOrder: string[];
  /** values permuted to rowOrder x colOrder */
  grid: number[][];
  blocks: BlockSpan[];
}

/** Groups ordered by smallest configuration label; rows grouped with their
 * assigned block, sorted inside it. */
export function buildHeatmap(consensus: ConsensusDoc): HeatmapModel {
  const affinity = consensus.affinity;
  if (!affinity) {
    throw new Error("result carries no affinity matrix");
  }
  const groups = [...consensus.groups]
    .map((g) => [...g].sort())
    .sort((a, b) => (a[0] < b[0] ? -1 : 1));
  const rowOrder: string[] = [];
  const colOrder: string[] = [];
  const blocks: BlockSpan[] = [];
  for (const configs of groups) {
    const label = configs[0];
    const sols = Object.entries(consensus.solution_assignment)
      .filter(([, assigned]) => assigned === label)
      .map(([sol]) => sol)
      .sort();
    blocks.push({
      rowStart: rowOrder.length,
      rowEnd: rowOrder.length + sols.length,
      colStart: colOrder.length,
      colEnd: colOrder.length + configs.length,
      configs,
    });
    rowOrder.push(...sols);
    colOrder.push(...configs);
  }
  const rowIndex = new Map(affinity.rows.map((r, i) => [r, i]));
  const colIndex = new Map(affinity.cols.map((c, i) => [c, i]));
  const grid = rowOrder.map((row) =>
    colOrder.map((col) => {
      const r = rowIndex.get(row);
      const c = colIndex.get(col);
      if (r === undefined || c === undefined) {
        throw new Error(`affinity matrix is missing (${row}, ${col})`);
      }
      return affinity.entries[r][c];
    }),
  );
  return { rowOrder, colOrder, grid, blocks };
}

/** Fixed [0, 1] scale so renders are comparable across runs: 0 maps to
 * white, 1 to a saturated blue. */
export function cellColor(value: number): string {
  const clamped = Math.max(0, Math.min(1, value));
  const channel = Math.round(255 * (1 - clamped));
  return `rgb(${channel}, ${channel}, 255)`;
}

/** Configurations listed when a diagonal block is clicked. */
export function blockConfigurations(
  consensus: ConsensusDoc,
  block: BlockSpan,
): { label: string; row: string[]; score: number }[] {
  return block.configs.map((label) => {
    const cfg = consensus.configurations[label];
    return { label, row: cfg.selections.map(([, sol]) => sol), score: cfg.score };
  });
}
