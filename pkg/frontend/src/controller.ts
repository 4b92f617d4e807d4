/** Glue between the editor state and the service: posts edits, triggers
 * reruns (auto-rerun is a toggle, default on), and folds the recorded
 * event stream back into the state. Rendering subscribes to `state`.
 */

import { ServiceClient } from "./api.js";
import { AppState, editCell, initialState, replay } from "./state.js";

export class SessionController {
  state: AppState;
  private eventCursor = 0;

  constructor(
    private readonly client: ServiceClient,
    relation: string,
    rows: string[],
    cols: string[],
    grid: number[][],
  ) {
    this.state = initialState(relation, rows, cols, grid);
  }

  async open(document: string): Promise<void> {
    const created = await this.client.createSession(document);
    this.state = { ...this.state, session: created.session, revision: created.revision };
  }

  private requireSession(): string {
    if (this.state.session === null) {
      throw new Error("no session open");
    }
    return this.state.session;
  }

  /** Pull every event recorded since the last sync and apply it in order. */
  async sync(): Promise<void> {
    const events = await this.client.fetchEvents(this.requireSession(), this.eventCursor);
    if (events.length > 0) {
      this.eventCursor = events[events.length - 1].seq + 1;
    }
    this.state = replay(this.state, events);
  }

  async run(): Promise<void> {
    await this.client.startRun(this.requireSession());
    await this.sync();
  }

  /** Stage, post, and (with auto-rerun on) recompute after one cell edit.
   * Locally-invalid input never reaches the service. */
  async handleEdit(row: string, col: string, raw: string): Promise<boolean> {
    const outcome = editCell(this.state, row, col, raw);
    this.state = outcome.state;
    if (!outcome.update) {
      return false;
    }
    const posted = await this.client.postUpdate(this.requireSession(), outcome.update);
    await this.sync();
    if (posted.accepted && this.state.autoRerun) {
      await this.run();
    }
    return posted.accepted;
  }

  setAutoRerun(enabled: boolean): void {
    this.state = { ...this.state, autoRerun: enabled };
  }
}
