"""Append-only run persistence: one directory per run plus a line index.

Layout under the data root:

    runs/<run_id>/record.json     status, timestamps, error
    runs/<run_id>/config.json     the posted config, echoed byte-stably
    runs/<run_id>/report.json, metrics.json, panels/...
    compares/<compare_id>/...
    index.jsonl                   one line per submitted run

record.json transitions QUEUED -> RUNNING -> DONE | FAILED and is written
atomically; DONE records are never rewritten.
"""

from __future__ import annotations

import datetime as _dt
import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import MotionscopeError
from .export import write_json


class UnknownRunError(MotionscopeError):
    pass


@dataclass
class RunRecord:
    run_id: str
    created_at: str
    status: str = "QUEUED"
    mode: str = "NON_STEREO"
    error: str | None = None
    error_kind: str | None = None
    metrics: dict = field(default_factory=dict)
    panels: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "created_at": self.created_at,
            "status": self.status,
            "mode": self.mode,
            "error": self.error,
            "error_kind": self.error_kind,
            "metrics": self.metrics,
            "panels": self.panels,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(**{k: d.get(k) for k in
                      ("run_id", "created_at", "status", "mode", "error", "error_kind")},
                   metrics=d.get("metrics") or {}, panels=d.get("panels") or [])


_VALID_TRANSITIONS = {
    "QUEUED": {"RUNNING"},
    "RUNNING": {"DONE", "FAILED"},
    "DONE": set(),
    "FAILED": set(),
}


class RunStore:
    def __init__(self, root: Path | str):
        self.root = Path(root)
        (self.root / "runs").mkdir(parents=True, exist_ok=True)
        (self.root / "compares").mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def run_dir(self, run_id: str) -> Path:
        return self.root / "runs" / run_id

    def compare_dir(self, compare_id: str) -> Path:
        return self.root / "compares" / compare_id

    @staticmethod
    def new_id(prefix: str = "r") -> str:
        return prefix + uuid.uuid4().hex[:12]

    def create_run(self, config_payload: dict, mode: str) -> RunRecord:
        run_id = str(config_payload.get("id") or "") or self.new_id()
        record = RunRecord(run_id=run_id,
                           created_at=_dt.datetime.now(_dt.timezone.utc).isoformat(),
                           mode=mode)
        rd = self.run_dir(run_id)
        rd.mkdir(parents=True, exist_ok=True)
        payload = dict(config_payload)
        payload["id"] = run_id
        write_json(rd / "config.json", payload)
        self._write_record(record)
        with self._lock:
            with open(self.root / "index.jsonl", "a") as fh:
                fh.write(json.dumps({"run_id": run_id, "created_at": record.created_at}) + "\n")
        return record

    def _write_record(self, record: RunRecord) -> None:
        write_json(self.run_dir(record.run_id) / "record.json", record.to_dict())

    def transition(self, run_id: str, status: str, **updates) -> RunRecord:
        with self._lock:
            record = self.get_record(run_id)
            if status not in _VALID_TRANSITIONS[record.status]:
                raise MotionscopeError(
                    f"illegal status transition {record.status} -> {status} for {run_id}")
            record.status = status
            for k, v in updates.items():
                setattr(record, k, v)
            self._write_record(record)
            return record

    def get_record(self, run_id: str) -> RunRecord:
        path = self.run_dir(run_id) / "record.json"
        if not path.exists():
            raise UnknownRunError(f"unknown run id {run_id}")
        return RunRecord.from_dict(json.loads(path.read_text()))

    def get_config_payload(self, run_id: str) -> dict:
        path = self.run_dir(run_id) / "config.json"
        if not path.exists():
            raise UnknownRunError(f"unknown run id {run_id}")
        return json.loads(path.read_text())

    def list_runs(self, limit: int = 50, offset: int = 0) -> list[RunRecord]:
        index = self.root / "index.jsonl"
        if not index.exists():
            return []
        lines = index.read_text().splitlines()
        ids = [json.loads(line)["run_id"] for line in lines if line.strip()]
        ids.reverse()  # newest first
        out = []
        for run_id in ids[offset:offset + limit]:
            try:
                out.append(self.get_record(run_id))
            except UnknownRunError:
                continue
        return out

    def panel_path(self, run_id: str, panel: str) -> Path:
        return self.run_dir(run_id) / "panels" / f"{panel}.bin"
