/** Browser entry point: load a model document, open a session, and wire
 * the editor, run controls, and heatmap into the page. */

import { ServiceClient } from "./api.js";
import { SessionController } from "./controller.js";
import { buildHeatmap } from "./heatmap.js";
import { renderEditor, renderHeatmap, renderOptimum, renderProgress } from "./render.js";

interface BootConfig {
  serviceBase: string;
  documentUrl: string;
  relation: string;
  rows: string[];
  cols: string[];
  grid: number[][];
}

async function boot(config: BootConfig): Promise<void> {
  const client = new ServiceClient(config.serviceBase);
  const controller = new SessionController(
    client,
    config.relation,
    config.rows,
    config.cols,
    config.grid,
  );
  const container = document.getElementById("app");
  if (!container) {
    throw new Error("missing #app container");
  }

  const paint = (): void => {
    const { state } = controller;
    const consensus = state.result?.consensus ?? null;
    const heatmap =
      consensus && consensus.affinity
        ? renderHeatmap(buildHeatmap(consensus), consensus)
        : "<p>No consensus groups to show.</p>";
    container.innerHTML = `
      <section id="editor">${renderEditor(state)}</section>
      <section id="controls">
        <button id="run">Run</button>
        <label><input type="checkbox" id="auto" ${state.autoRerun ? "checked" : ""}> auto-rerun</label>
        ${renderProgress(state)}
      </section>
      <section id="optimum">${renderOptimum(state)}</section>
      <section id="heatmap">${heatmap}</section>`;

    container.querySelectorAll<HTMLInputElement>("#editor input").forEach((input) => {
      input.addEventListener("change", () => {
        void controller
          .handleEdit(input.dataset.row ?? "", input.dataset.col ?? "", input.value)
          .then(paint);
      });
    });
    const runButton = container.querySelector<HTMLButtonElement>("#run");
    runButton?.addEventListener("click", () => void controller.run().then(paint));
    const auto = container.querySelector<HTMLInputElement>("#auto");
    auto?.addEventListener("change", () => {
      controller.setAutoRerun(auto.checked);
      paint();
    });
  };

  const document_ = await (await fetch(config.documentUrl)).text();
  await controller.open(document_);
  await controller.run();
  paint();
}

declare global {
  interface Window {
    bootConfiguratorUi: (config: BootConfig) => Promise<void>;
  }
}

window.bootConfiguratorUi = boot;
