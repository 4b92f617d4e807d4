"""Session-oriented HTTP API: create a model session, post updates, start
runs, fetch the latest result, and follow a live event stream.

One logical writer per session: updates and run lifecycle are serialized
under the session lock. A run always computes against the latest revision;
if an update lands mid-run the stale result is discarded and the run
restarts, so no out-of-date result is ever published.
"""

from __future__ import annotations

import itertools
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from .modelio import ModelParseError, parse_model, result_to_dict
from .pipeline import (
    AddSolution,
    CellEdit,
    ConfigurationModel,
    ModelValidationError,
    OptionChange,
    RemoveAgent,
    Update,
    UpdateRejected,
    apply_update,
    run_configuration,
)

EVENT_KINDS = (
    "phase-started",
    "phase-finished",
    "sweep-completed",
    "partition-changed",
    "result-ready",
    "update-accepted",
    "update-rejected",
)


@dataclass(frozen=True)
class EngineEvent:
    seq: int
    kind: str
    revision: int
    payload: dict[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "kind": self.kind,
            "revision": self.revision,
            "payload": self.payload,
        }


def update_from_dict(doc: dict[str, Any]) -> Update:
    kind = doc.get("kind")
    try:
        if kind == "cell-edit":
            return CellEdit(doc["relation"], doc["row"], doc["col"], doc["value"])
        if kind == "add-solution":
            return AddSolution(
                doc["id"], doc["function"], doc["evaluation"], doc.get("label", "")
            )
        if kind == "remove-agent":
            return RemoveAgent(doc["id"])
        if kind == "option-change":
            return OptionChange(doc["name"], doc["value"])
    except KeyError as exc:
        raise UpdateRejected(f"update is missing field {exc.args[0]!r}") from None
    raise UpdateRejected(f"unknown update kind {kind!r}")


def update_to_dict(update: Update) -> dict[str, Any]:
    if isinstance(update, CellEdit):
        return {
            "kind": "cell-edit",
            "relation": update.relation,
            "row": update.row,
            "col": update.col,
            "value": update.value,
        }
    if isinstance(update, AddSolution):
        return {
            "kind": "add-solution",
            "id": update.id,
            "function": update.function,
            "evaluation": update.evaluation,
            "label": update.label,
        }
    if isinstance(update, RemoveAgent):
        return {"kind": "remove-agent", "id": update.id}
    if isinstance(update, OptionChange):
        return {"kind": "option-change", "name": update.name, "value": update.value}
    raise TypeError(f"not an update: {update!r}")


@dataclass
class Session:
    id: str
    model: ConfigurationModel
    update_log: Path | None = None
    revision: int = 0
    latest_result: dict[str, Any] | None = None
    result_revision: int | None = None
    events: list[EngineEvent] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    new_event: threading.Condition = field(init=False)
    run_thread: threading.Thread | None = None
    # test/instrumentation hook invoked between pipeline events during a run
    mid_run_hook: Any = None

    def __post_init__(self) -> None:
        self.new_event = threading.Condition(self.lock)

    def _record(self, kind: str, revision: int, payload: dict[str, Any]) -> EngineEvent:
        event = EngineEvent(len(self.events), kind, revision, payload)
        self.events.append(event)
        self.new_event.notify_all()
        return event

    def _log(self, entry: dict[str, Any]) -> None:
        if self.update_log is not None:
            with self.update_log.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")

    def post_update(self, doc: dict[str, Any]) -> dict[str, Any]:
        with self.lock:
            try:
                update = update_from_dict(doc)
                self.model = apply_update(self.model, update)
            except UpdateRejected as exc:
                self._record("update-rejected", self.revision, {"reason": str(exc)})
                return {"accepted": False, "reasons": [str(exc)]}
            self.revision += 1
            self._record("update-accepted", self.revision, {"update": doc})
            self._log({"type": "update", "update": doc})
        return {"accepted": True, "revision": self.revision}

    def start_run(self, wait: bool = True) -> dict[str, Any]:
        with self.lock:
            if self.run_thread is not None and self.run_thread.is_alive():
                thread = self.run_thread
            else:
                thread = threading.Thread(target=self._run_loop, daemon=True)
                self.run_thread = thread
                thread.start()
            self._log({"type": "run"})
        if wait:
            thread.join()
        return {"running": thread.is_alive(), "revision": self.revision}

    def _run_loop(self) -> None:
        # recompute until the model we ran against is still current; stale
        # results are discarded, never published
        while True:
            with self.lock:
                revision = self.revision
                model = self.model

            def emit(kind: str, payload: dict[str, Any]) -> None:
                with self.lock:
                    self._record(kind, revision, payload)
                if self.mid_run_hook is not None:
                    self.mid_run_hook(kind, payload)

            try:
                result = run_configuration(model, emit=emit)
            except (ModelValidationError, Exception) as exc:  # noqa: BLE001
                with self.lock:
                    self._record("update-rejected", revision, {"reason": f"run failed: {exc}"})
                return
            with self.lock:
                if self.revision != revision:
                    continue  # superseded: drop the stale result, go again
                self.latest_result = result_to_dict(result)
                self.result_revision = revision
                self._record("result-ready", revision, {"result": self.latest_result})
                return

    def get_result(self) -> dict[str, Any]:
        with self.lock:
            if self.latest_result is None:
                return {"status": "empty", "revision": self.revision}
            return {
                "status": "ready",
                "revision": self.result_revision,
                "result": self.latest_result,
            }

    def event_kinds(self) -> list[str]:
        with self.lock:
            return [e.kind for e in self.events]


class SessionStore:
    def __init__(self, log_dir: Path | None = None):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._counter = itertools.count(1)
        self.log_dir = log_dir

    def create(self, document: str) -> tuple[Session, list[str]]:
        model = parse_model(document)  # raises with located issues
        with self._lock:
            sid = f"s{next(self._counter)}"
            log = self.log_dir / f"{sid}.jsonl" if self.log_dir else None
            if log is not None:
                log.write_text(
                    json.dumps({"type": "model", "document": document}) + "\n",
                    encoding="utf-8",
                )
            session = Session(sid, model, update_log=log)
            self._sessions[sid] = session
        return session, []

    def get(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise KeyError(session_id)
        return session


def replay_log(lines: list[str]) -> Session:
    """Rebuild a session from its update log; deterministic end to end."""
    entries = [json.loads(line) for line in lines if line.strip()]
    if not entries or entries[0].get("type") != "model":
        raise ValueError("log must start with a model entry")
    session = Session("replay", parse_model(entries[0]["document"]))
    for entry in entries[1:]:
        if entry["type"] == "update":
            session.post_update(entry["update"])
        elif entry["type"] == "run":
            session.start_run(wait=True)
    return session


class CreateSessionBody(BaseModel):
    document: str


class UpdateBody(BaseModel):
    kind: str
    relation: str | None = None
    row: str | None = None
    col: str | None = None
    value: Any = None
    id: str | None = None
    function: str | None = None
    evaluation: float | None = None
    label: str = ""
    name: str | None = None


def create_app(store: SessionStore | None = None) -> FastAPI:
    app = FastAPI(title="fuzzy configuration service")
    app.state.store = store or SessionStore()

    def session_or_404(session_id: str) -> Session:
        try:
            return app.state.store.get(session_id)
        except KeyError:
            raise HTTPException(
                status_code=404,
                detail={"reason": "session-not-found", "session": session_id},
            ) from None

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        try:
            session, warnings = app.state.store.create(body.document)
        except ModelParseError as exc:
            raise HTTPException(
                status_code=422,
                detail={
                    "reason": "model-invalid",
                    "issues": [str(i) for i in exc.issues],
                },
            ) from None
        return {"session": session.id, "revision": session.revision, "issues": warnings}

    @app.post("/sessions/{session_id}/updates")
    def post_update(session_id: str, body: UpdateBody):
        session = session_or_404(session_id)
        outcome = session.post_update(body.model_dump(exclude_none=True))
        if not outcome["accepted"]:
            return {"accepted": False, "reasons": outcome["reasons"]}
        return outcome

    @app.post("/sessions/{session_id}/runs")
    def start_run(session_id: str):
        session = session_or_404(session_id)
        return session.start_run(wait=True)

    @app.get("/sessions/{session_id}/result")
    def get_result(session_id: str):
        return session_or_404(session_id).get_result()

    @app.get("/sessions/{session_id}/events")
    def stream_events(session_id: str, from_seq: int = 0, follow: bool = False):
        session = session_or_404(session_id)

        def generate() -> Iterator[str]:
            cursor = from_seq
            while True:
                with session.lock:
                    events = session.events[cursor:]
                    cursor = len(session.events)
                for event in events:
                    yield json.dumps(event.to_dict(), sort_keys=True) + "\n"
                if not follow:
                    return
                with session.new_event:
                    if cursor >= len(session.events):
                        session.new_event.wait(timeout=10.0)
                        if cursor >= len(session.events):
                            return

        return StreamingResponse(generate(), media_type="application/x-ndjson")

    return app


app = create_app()
