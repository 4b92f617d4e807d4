/** End-to-end feedback loop against the real HTTP service: edit a cell,
 * auto-rerun, and watch the displayed optimum change — then replay the
 * recorded event stream and get the same rendered state. */

import { spawn, ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import { createServer } from "node:net";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api.js";
import { SessionController } from "../src/controller.js";
import { initialState, displayedSelections, replay } from "../src/state.js";
import { renderOptimum } from "../src/render.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixturePath = join(here, "..", "..", "src", "fuzzycfg", "fixtures", "conveyor.yaml");

const EXPECTED_OPTIMUM = [
  "S1", "S2", "S3", "S5", "S7", "S9", "S10", "S12",
  "S15", "S18", "S20", "S23", "S25", "S28",
];

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.once("error", reject);
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port"));
        return;
      }
      server.close(() => resolve(address.port));
    });
  });
}

let service: ChildProcess;
let base: string;

beforeAll(async () => {
  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  service = spawn(
    "python3",
    [
      "-c",
      "import uvicorn; from fuzzycfg.service import create_app; " +
        `uvicorn.run(create_app(), host='127.0.0.1', port=${port}, log_level='error')`,
    ],
    { stdio: "ignore" },
  );
  const deadline = Date.now() + 20_000;
  for (;;) {
    try {
      await fetch(`${base}/sessions/none/result`);
      return;
    } catch {
      if (Date.now() > deadline) {
        throw new Error("service did not come up");
      }
      await new Promise((r) => setTimeout(r, 100));
    }
  }
}, 30_000);

afterAll(() => {
  service?.kill();
});

const newController = (client: ServiceClient) =>
  new SessionController(client, "functions_solutions", ["F3"], ["S3", "S4"], [[0.9, 0.6]]);

describe("UI feedback loop", () => {
  it("edit of (F3, S4) to 0.95 flips the displayed F3 slot within one result-ready", async () => {
    const client = new ServiceClient(base);
    const controller = newController(client);
    await controller.open(readFileSync(fixturePath, "utf-8"));
    await controller.run();

    const baseline = displayedSelections(controller.state);
    expect(baseline).not.toBeNull();
    expect(Object.values(baseline!)).toEqual(EXPECTED_OPTIMUM);
    expect(baseline!["F3"]).toBe("S3");
    const readyBefore = (await client.fetchEvents(controller.state.session!)).filter(
      (e) => e.kind === "result-ready",
    ).length;

    const accepted = await controller.handleEdit("F3", "S4", "0.95");
    expect(accepted).toBe(true);

    const after = displayedSelections(controller.state);
    expect(after!["F3"]).toBe("S4");
    expect(controller.state.resultRevision).toBe(1);
    const readyAfter = (await client.fetchEvents(controller.state.session!)).filter(
      (e) => e.kind === "result-ready",
    ).length;
    expect(readyAfter - readyBefore).toBe(1);
  }, 30_000);

  it("replaying the recorded event stream reproduces the rendered state", async () => {
    const client = new ServiceClient(base);
    const controller = newController(client);
    await controller.open(readFileSync(fixturePath, "utf-8"));
    await controller.run();
    await controller.handleEdit("F3", "S4", "0.95");

    const events = await client.fetchEvents(controller.state.session!);
    const snapshot = {
      ...initialState("functions_solutions", ["F3"], ["S3", "S4"], [[0.9, 0.6]]),
      session: controller.state.session,
    };
    const replayed = replay(snapshot, events);

    expect(renderOptimum(replayed)).toBe(renderOptimum(controller.state));
    expect(displayedSelections(replayed)).toEqual(displayedSelections(controller.state));
    expect(replayed.resultRevision).toBe(controller.state.resultRevision);
  }, 30_000);

  it("a locally-invalid edit posts nothing to the service", async () => {
    const client = new ServiceClient(base);
    const controller = newController(client);
    await controller.open(readFileSync(fixturePath, "utf-8"));
    await controller.run();

    const eventsBefore = (await client.fetchEvents(controller.state.session!)).length;
    const accepted = await controller.handleEdit("F3", "S4", "1.4");
    expect(accepted).toBe(false);
    expect(controller.state.editor.lastRejection).toContain("1.4");
    const eventsAfter = (await client.fetchEvents(controller.state.session!)).length;
    expect(eventsAfter).toBe(eventsBefore);
  }, 30_000);

  it("manual mode batches edits without rerunning", async () => {
    const client = new ServiceClient(base);
    const controller = newController(client);
    await controller.open(readFileSync(fixturePath, "utf-8"));
    await controller.run();
    const revisionBefore = controller.state.resultRevision;

    controller.setAutoRerun(false);
    await controller.handleEdit("F3", "S4", "0.7");
    expect(controller.state.resultRevision).toBe(revisionBefore);
    await controller.run();
    expect(controller.state.resultRevision).toBe(1);
  }, 30_000);
});
