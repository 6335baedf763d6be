"""Command-line interface: run | compare | csf | stereo | serve.

Failures print one machine-readable JSON line to stdout and exit with
2 (schema), 3 (engine validation), or 4 (resource limit).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..errors import ResourceLimitError, ValidationError
from ..params import Backend, RunMode, config_to_dict
from .schema import SchemaError, parse_config

EXIT_SCHEMA = 2
EXIT_VALIDATION = 3
EXIT_RESOURCE = 4


def _fail(code: int, kind: str, message: str, field: str | None = None) -> int:
    payload = {"error": kind, "message": message}
    if field:
        payload["field"] = field
    print(json.dumps(payload))
    return code


def resolve_backend(requested: Backend) -> str:
    """auto prefers an accelerator when one exists; otherwise cpu."""
    if requested is Backend.CPU:
        return "cpu"
    available = False
    try:
        import torch  # noqa: F401 | optional

        available = torch.cuda.is_available()
    except Exception:
        available = False
    if requested is Backend.ACCELERATOR and not available:
        print("no accelerator device found; falling back to cpu", file=sys.stderr)
        return "cpu"
    return "accelerator" if available else "cpu"


def _load_config(path: str, backend_override: str | None):
    try:
        payload = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise SchemaError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config is not valid JSON: {exc}")
    if backend_override:
        payload["backend"] = backend_override
    return payload, parse_config(payload)


def _master_result(master_path: str):
    """A master reference: either a run output directory or a config to execute."""
    from ..pipeline import run_prediction

    p = Path(master_path)
    if p.is_dir():
        return _result_from_dir(p)
    payload, config = _load_config(master_path, None)
    return run_prediction(config.with_id("master"))


def _result_from_dir(run_dir: Path):
    """Rehydrate the pieces of a persisted run needed for comparisons."""
    from ..pipeline import ArtifactReport, PanelSet, RunResult
    from ..stimulus import FrameOfReference, RasterGrid, SpaceTimeRaster
    from .export import read_panel

    def load_raster(name: str) -> SpaceTimeRaster:
        data, sidecar = read_panel(run_dir / "panels" / f"{name}.bin")
        ax = sidecar["axes"]
        nt, nx = data.shape[1], data.shape[2]
        grid = RasterGrid(nt=nt, nx=nx, t_pitch_s=ax["t"]["pitch"], x_pitch_deg=ax["x"]["pitch"],
                          x_origin_deg=ax["x"]["origin"], n_frames=nt, frame_period_s=ax["t"]["pitch"])
        return SpaceTimeRaster(data=data.astype(float), grid=grid,
                               frame_of_reference=FrameOfReference(sidecar["frame_of_reference"]),
                               channel_backgrounds=tuple(0.0 for _ in sidecar["channels"]))

    config_payload = json.loads((run_dir / "config.json").read_text())
    report_raw = json.loads((run_dir / "report.json").read_text())
    report = ArtifactReport(
        flicker=report_raw["flicker"],
        flicker_components=tuple((n, w) for n, w in report_raw["flicker_components"]),
        judder=report_raw["judder"],
        visible_replicates=report_raw["visible_replicates"],
        edge_banding=report_raw["edge_banding"],
        motion_blur=report_raw["motion_blur"],
        blur_ratio=report_raw["blur_ratio"],
        color_breakup=report_raw["color_breakup"],
        centroid_separation_deg=report_raw["centroid_separation_deg"],
    )
    cont_stim = load_raster("continuous_stimulus")
    cont_rec = load_raster("continuous_reconstruction")
    samp_stim = load_raster("sampled_stimulus")
    samp_rec = load_raster("sampled_reconstruction")
    metrics = json.loads((run_dir / "metrics.json").read_text())
    config = parse_config(config_payload)
    return RunResult(
        run_id=config_payload.get("id") or run_dir.name, config=config,
        continuous=PanelSet(cont_stim, None, None, cont_rec),
        sampled=PanelSet(samp_stim, None, None, samp_rec),
        report=report, metrics=metrics,
    )


def cmd_run(args) -> int:
    from ..pipeline import RunResult, compare_runs, execute_run
    from .export import write_comparison_outputs, write_run_outputs, write_stereo_outputs

    try:
        payload, config = _load_config(args.config, args.backend)
        config = config.with_id(config.id or None)
        resolve_backend(config.backend)
        result = execute_run(config)
        out = Path(args.out)
        if isinstance(result, RunResult):
            write_run_outputs(result, out, figures=not args.no_figures)
        else:
            write_stereo_outputs(result, out, figures=not args.no_figures)
        if args.master and isinstance(result, RunResult):
            master = _master_result(args.master)
            comparison = compare_runs([result], master=master)
            write_comparison_outputs(comparison, out / "compare", figures=not args.no_figures)
        print(json.dumps({"run_id": result.run_id, "out": str(out),
                          "metrics": result.metrics}))
        return 0
    except SchemaError as exc:
        return _fail(EXIT_SCHEMA, "schema", str(exc), getattr(exc, "path", None))
    except ValidationError as exc:
        return _fail(EXIT_VALIDATION, "validation", str(exc), exc.field)
    except ResourceLimitError as exc:
        return _fail(EXIT_RESOURCE, "resource_limit", str(exc))


def cmd_compare(args) -> int:
    from ..pipeline import compare_runs
    from .export import write_comparison_outputs

    try:
        runs = [_result_from_dir(Path(d)) for d in args.run_dirs]
        master = _master_result(args.master) if args.master else None
        comparison = compare_runs(runs, master=master)
        write_comparison_outputs(comparison, Path(args.out), figures=not args.no_figures)
        print(json.dumps(comparison.to_dict()))
        return 0
    except FileNotFoundError as exc:
        return _fail(EXIT_SCHEMA, "schema", f"missing run artifact: {exc}")
    except SchemaError as exc:
        return _fail(EXIT_SCHEMA, "schema", str(exc))
    except ValidationError as exc:
        return _fail(EXIT_VALIDATION, "validation", str(exc), exc.field)


def cmd_csf(args) -> int:
    from .. import plotting
    from ..csf import OMEGA_FLOOR_HZ, CsfModel, luminance_to_trolands

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lums = args.luminance or [0.5, 2.0, 10.0, 50.0, 160.0]
    w = np.geomspace(OMEGA_FLOOR_HZ, 90, 200)
    models = [CsfModel(L, object_size_deg=args.object_size) for L in lums]

    lines = ["temporal_frequency_hz," + ",".join(f"L{L:g}cdm2_{luminance_to_trolands(L):.0f}Td"
                                                 for L in lums)]
    for i, wi in enumerate(w):
        vals = [m.temporal(wi) for m in models]
        lines.append(f"{wi:.6f}," + ",".join(f"{v:.6f}" for v in vals))
    (out / "temporal_family.csv").write_text("\n".join(lines) + "\n")

    u = np.geomspace(0.2, 60, 150)
    for L, m in zip(lums, models):
        surf = ["u_cpd\\w_hz," + ",".join(f"{wi:.4f}" for wi in w)]
        cs = np.sqrt(np.outer(m.spatial(u), m.temporal(w)))
        for i, ui in enumerate(u):
            surf.append(f"{ui:.6f}," + ",".join(f"{v:.6f}" for v in cs[i]))
        (out / f"surface_L{L:g}.csv").write_text("\n".join(surf) + "\n")
    plotting.render_csf_figure(lums, str(out / "csf.png"))
    print(json.dumps({"out": str(out), "luminances": lums}))
    return 0


def cmd_stereo(args) -> int:
    from ..pipeline import run_stereo
    from .export import write_stereo_outputs

    try:
        payload, config = _load_config(args.config, args.backend)
        if config.mode is not RunMode.STEREO:
            raise ValidationError("stereo subcommand needs a STEREO-mode config", "mode")
        result = run_stereo(config.with_id(config.id or None))
        write_stereo_outputs(result, Path(args.out), figures=not args.no_figures)
        print(json.dumps({"run_id": result.run_id, "metrics": result.metrics}))
        return 0
    except SchemaError as exc:
        return _fail(EXIT_SCHEMA, "schema", str(exc), getattr(exc, "path", None))
    except ValidationError as exc:
        return _fail(EXIT_VALIDATION, "validation", str(exc), exc.field)


def cmd_defaults(args) -> int:
    from ..params import default_config, default_stereo_config

    config = default_stereo_config() if args.stereo else default_config()
    print(json.dumps(config_to_dict(config), indent=2))
    return 0


def cmd_serve(args) -> int:
    import os

    import uvicorn

    from .service import DATA_DIR_ENV, PORT_ENV, UI_DIR_ENV, create_app

    if args.ui_dir:
        os.environ[UI_DIR_ENV] = args.ui_dir
    port = args.port or int(os.environ.get(PORT_ENV, "8008"))
    data_dir = args.data_dir or os.environ.get(DATA_DIR_ENV, "./motionscope-data")
    uvicorn.run(create_app(data_dir), host=args.host, port=port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="motionscope",
                                     description="display motion-artifact prediction")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a prediction run from a config file")
    p_run.add_argument("-c", "--config", required=True)
    p_run.add_argument("-o", "--out", required=True)
    p_run.add_argument("--master", help="run directory or config to compare against")
    p_run.add_argument("--backend", choices=[b.value for b in Backend])
    p_run.add_argument("--no-figures", action="store_true")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="compare persisted runs against a reference")
    p_cmp.add_argument("run_dirs", nargs="+")
    p_cmp.add_argument("--master", help="master run directory (default: continuous reference)")
    p_cmp.add_argument("-o", "--out", required=True)
    p_cmp.add_argument("--no-figures", action="store_true")
    p_cmp.set_defaults(func=cmd_compare)

    p_csf = sub.add_parser("csf", help="export sensitivity surfaces as CSV and PNG")
    p_csf.add_argument("-o", "--out", required=True)
    p_csf.add_argument("--luminance", type=float, action="append")
    p_csf.add_argument("--object-size", type=float, default=5.0)
    p_csf.set_defaults(func=cmd_csf)

    p_st = sub.add_parser("stereo", help="stereo disparity prediction from a config file")
    p_st.add_argument("-c", "--config", required=True)
    p_st.add_argument("-o", "--out", required=True)
    p_st.add_argument("--backend", choices=[b.value for b in Backend])
    p_st.add_argument("--no-figures", action="store_true")
    p_st.set_defaults(func=cmd_stereo)

    p_def = sub.add_parser("defaults", help="print a default config")
    p_def.add_argument("--stereo", action="store_true")
    p_def.set_defaults(func=cmd_defaults)

    p_srv = sub.add_parser("serve", help="start the HTTP service")
    p_srv.add_argument("--port", type=int)
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--data-dir")
    p_srv.add_argument("--ui-dir", help="built frontend directory to mount at /ui")
    p_srv.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
