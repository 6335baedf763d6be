"""REST service wrapping the engine: run submission, polling, panels, compare.

Runs execute on a bounded worker pool; submissions beyond the queue capacity
get 503. Panel bytes are served straight from the persisted files, so reads
are idempotent and stable.
"""

from __future__ import annotations

import json
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from ..errors import ResourceLimitError, ValidationError
from ..params import config_to_dict, default_config
from ..pipeline import RunResult, execute_run, resample_panel
from .export import read_panel, write_json
from .schema import CONFIG_SCHEMA, SchemaError, parse_config
from .storage import RunStore, UnknownRunError

DATA_DIR_ENV = "MOTIONSCOPE_DATA_DIR"
PORT_ENV = "MOTIONSCOPE_PORT"
UI_DIR_ENV = "MOTIONSCOPE_UI_DIR"


def _error(status: int, kind: str, message: str, field: str | None = None) -> JSONResponse:
    body = {"error": kind, "message": message}
    if field:
        body["field"] = field
    return JSONResponse(body, status_code=status)


def _load_lum_sum(store: RunStore, run_id: str, panel: str):
    data, sidecar = read_panel(store.panel_path(run_id, panel))
    values = data.astype(float).sum(axis=0)
    ax = sidecar["axes"]
    t = ax["t"]["origin"] + np.arange(values.shape[0]) * ax["t"]["pitch"]
    x = ax["x"]["origin"] + np.arange(values.shape[1]) * ax["x"]["pitch"]
    return values, t, x, sidecar


def compare_from_store(store: RunStore, run_ids: list[str], master_id: str | None) -> dict:
    """File-level compare: per-run sampled reconstruction against the reference."""
    if master_id:
        ref, t_ref, x_ref, _ = _load_lum_sum(store, master_id, "sampled_reconstruction")
        ref_label = master_id
    else:
        ref, t_ref, x_ref, _ = _load_lum_sum(store, run_ids[0], "continuous_reconstruction")
        ref_label = f"{run_ids[0]}:continuous"
    ref_energy = float(np.linalg.norm(ref - ref.mean())) or 1.0

    compare_id = store.new_id("c")
    cdir = store.compare_dir(compare_id)
    cdir.mkdir(parents=True, exist_ok=True)
    entries = []
    for run_id in run_ids:
        panel, t, x, sidecar = _load_lum_sum(store, run_id, "sampled_reconstruction")
        if panel.shape != ref.shape or not np.allclose(t, t_ref) or not np.allclose(x, x_ref):
            panel = resample_panel(panel, t, x, t_ref, x_ref)
        diff = panel - ref
        out = np.ascontiguousarray(diff, dtype="<f4")
        (cdir / f"diff_{run_id}.bin").write_bytes(out.tobytes())
        write_json(cdir / f"diff_{run_id}.bin.json",
                   {"kind": "difference", "shape": list(out.shape), "dtype": "<f4",
                    "axes": sidecar["axes"]})
        report_path = store.run_dir(run_id) / "report.json"
        entries.append({
            "run_id": run_id,
            "l2_rel": float(np.linalg.norm(diff) / ref_energy),
            "max_abs": float(np.abs(diff).max()),
            "report": json.loads(report_path.read_text()) if report_path.exists() else None,
        })
    bundle = {"compare_id": compare_id, "reference_id": ref_label, "entries": entries}
    write_json(cdir / "comparison.json", bundle)
    return bundle


def create_app(data_dir: str | Path | None = None, max_workers: int = 2,
               queue_capacity: int = 8, figures: bool = True) -> FastAPI:
    store = RunStore(data_dir or os.environ.get(DATA_DIR_ENV, "./motionscope-data"))
    app = FastAPI(title="motionscope", version="0.1.0")
    executor = ThreadPoolExecutor(max_workers=max_workers)
    pending = threading.Semaphore(queue_capacity)
    app.state.store = store

    def _execute(run_id: str) -> None:
        try:
            store.transition(run_id, "RUNNING")
            config = parse_config(store.get_config_payload(run_id))
            result = execute_run(config)
            out = store.run_dir(run_id)
            if isinstance(result, RunResult):
                from .export import PANEL_ORDER, write_run_outputs
                write_run_outputs(result, out, figures=figures)
                panels = PANEL_ORDER
            else:
                from .export import write_stereo_outputs
                write_stereo_outputs(result, out, figures=figures)
                panels = []
            store.transition(run_id, "DONE", metrics=result.metrics, panels=panels)
        except (ValidationError, SchemaError) as exc:
            store.transition(run_id, "FAILED", error=str(exc), error_kind="validation")
        except ResourceLimitError as exc:
            store.transition(run_id, "FAILED", error=str(exc), error_kind="resource_limit")
        except Exception as exc:  # engine bug: record, don't kill the worker
            store.transition(run_id, "FAILED", error=repr(exc), error_kind="internal")
        finally:
            pending.release()

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/defaults")
    def defaults(mode: str = "NON_STEREO"):
        from ..params import default_stereo_config

        if mode == "STEREO":
            return config_to_dict(default_stereo_config())
        return config_to_dict(default_config())

    @app.get("/schema")
    def schema():
        return CONFIG_SCHEMA

    @app.post("/runs", status_code=202)
    async def submit_run(request: Request):
        try:
            payload = await request.json()
        except json.JSONDecodeError as exc:
            return _error(400, "schema", f"body is not valid JSON: {exc}")
        try:
            config = parse_config(payload)
        except SchemaError as exc:
            return _error(400, "schema", str(exc), field=exc.path)
        except ValidationError as exc:
            return _error(422, "validation", str(exc), field=exc.field)
        if not pending.acquire(blocking=False):
            return _error(503, "over_capacity", "run queue is full; retry later")
        record = store.create_run(payload, mode=config.mode.value)
        executor.submit(_execute, record.run_id)
        return {"run_id": record.run_id}

    @app.get("/runs")
    def list_runs(limit: int = 50, offset: int = 0):
        return {"runs": [r.to_dict() for r in store.list_runs(limit=limit, offset=offset)]}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        try:
            record = store.get_record(run_id)
        except UnknownRunError as exc:
            return _error(404, "unknown_run", str(exc))
        body = record.to_dict()
        body["config"] = store.get_config_payload(run_id)
        return body

    @app.get("/runs/{run_id}/panels/{panel}")
    def get_panel(run_id: str, panel: str, request: Request):
        try:
            store.get_record(run_id)
        except UnknownRunError as exc:
            return _error(404, "unknown_run", str(exc))
        path = store.panel_path(run_id, panel)
        if not path.exists():
            return _error(404, "unknown_panel", f"run {run_id} has no panel {panel}")
        accept = request.headers.get("accept", "")
        if "image/png" in accept:
            png = path.with_suffix(".png")
            if png.exists():
                return Response(png.read_bytes(), media_type="image/png")
            return _error(404, "unknown_panel", "no rendered PNG for this panel")
        if "application/json" in accept:
            return json.loads(path.with_suffix(".bin.json").read_text())
        return Response(path.read_bytes(), media_type="application/octet-stream")

    ARTIFACT_FILES = {
        "schedule.csv": "text/csv",
        "disparity.csv": "text/csv",
        "bundle.json": "application/json",
        "disparity.png": "image/png",
        "panels.png": "image/png",
        "report.json": "application/json",
        "metrics.json": "application/json",
    }

    @app.get("/runs/{run_id}/artifacts/{name}")
    def get_artifact(run_id: str, name: str):
        try:
            store.get_record(run_id)
        except UnknownRunError as exc:
            return _error(404, "unknown_run", str(exc))
        if name not in ARTIFACT_FILES:
            return _error(404, "unknown_artifact", f"no artifact named {name}")
        path = store.run_dir(run_id) / name
        if not path.exists():
            return _error(404, "unknown_artifact", f"run {run_id} has no {name}")
        return Response(path.read_bytes(), media_type=ARTIFACT_FILES[name])

    @app.post("/compare")
    async def compare(request: Request):
        try:
            payload = await request.json()
        except json.JSONDecodeError as exc:
            return _error(400, "schema", f"body is not valid JSON: {exc}")
        run_ids = payload.get("run_ids") or []
        master_id = payload.get("master_id")
        if not isinstance(run_ids, list) or not run_ids:
            return _error(400, "schema", "run_ids must be a non-empty list", field="run_ids")
        try:
            for rid in run_ids + ([master_id] if master_id else []):
                record = store.get_record(rid)
                if record.status != "DONE":
                    return _error(409, "not_done", f"run {rid} is {record.status}")
                if record.mode != "NON_STEREO":
                    return _error(422, "validation", f"run {rid} is not a non-stereo run")
        except UnknownRunError as exc:
            return _error(404, "unknown_run", str(exc))
        return compare_from_store(store, run_ids, master_id)

    @app.get("/compare/{compare_id}")
    def get_compare(compare_id: str):
        path = store.compare_dir(compare_id) / "comparison.json"
        if not path.exists():
            return _error(404, "unknown_compare", f"unknown comparison {compare_id}")
        return json.loads(path.read_text())

    @app.get("/compare/{compare_id}/panels/{panel}")
    def get_compare_panel(compare_id: str, panel: str, request: Request):
        path = store.compare_dir(compare_id) / f"{panel}.bin"
        if not path.exists():
            return _error(404, "unknown_panel", f"no panel {panel} in {compare_id}")
        if "application/json" in request.headers.get("accept", ""):
            return json.loads(path.with_suffix(".bin.json").read_text())
        return Response(path.read_bytes(), media_type="application/octet-stream")

    ui_dir = os.environ.get(UI_DIR_ENV)
    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def main() -> None:
    import uvicorn

    port = int(os.environ.get(PORT_ENV, "8008"))
    uvicorn.run(create_app(), host="127.0.0.1", port=port)


if __name__ == "__main__":
    main()
