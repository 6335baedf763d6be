"""Panel persistence: little-endian float32 binaries with JSON sidecars, PNGs.

The binary contract is bit-exact: row-major float32, shape recorded in the
sidecar, suitable for golden-file comparisons. Writes are atomic
(temp + rename).
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from ..pipeline import ComparisonResult, RunResult, StereoRunResult
from ..spectrum import Spectrum
from ..stimulus import SpaceTimeRaster

CHANNEL_NAMES = {1: ["luminance"], 3: ["red", "green", "blue"]}


def _atomic_write_bytes(path: Path, payload: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, payload: dict) -> None:
    _atomic_write_bytes(Path(path), (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode())


def _write_array(path: Path, array: np.ndarray, sidecar: dict) -> None:
    data = np.ascontiguousarray(array, dtype="<f4")
    _atomic_write_bytes(path, data.tobytes())
    sidecar = dict(sidecar)
    sidecar.update({"shape": list(data.shape), "dtype": "<f4", "order": "C"})
    write_json(path.with_suffix(path.suffix + ".json"), sidecar)


def write_raster(path: Path, raster: SpaceTimeRaster) -> None:
    g = raster.grid
    _write_array(Path(path), raster.data, {
        "kind": "raster",
        "channels": CHANNEL_NAMES[raster.channels],
        "frame_of_reference": raster.frame_of_reference.value,
        "axes": {
            "t": {"origin": 0.0, "pitch": g.t_pitch_s, "unit": "s"},
            "x": {"origin": g.x_origin_deg, "pitch": g.x_pitch_deg, "unit": "deg"},
        },
        "units": "cd/m^2",
    })


def write_spectrum(path: Path, spec: Spectrum) -> None:
    _write_array(Path(path), spec.magnitude(), {
        "kind": "spectrum_magnitude",
        "channels": CHANNEL_NAMES[spec.channels],
        "axes": {
            "w": {"origin": float(spec.w_axis[0]), "pitch": float(spec.w_axis[1] - spec.w_axis[0]),
                  "unit": "Hz"},
            "u": {"origin": float(spec.u_axis[0]), "pitch": float(spec.u_axis[1] - spec.u_axis[0]),
                  "unit": "cpd"},
        },
        "mean_luminance": list(spec.mean_luminance),
    })


def write_difference(path: Path, diff: np.ndarray, reference: SpaceTimeRaster) -> None:
    g = reference.grid
    _write_array(Path(path), diff, {
        "kind": "difference",
        "channels": ["luminance"],
        "axes": {
            "t": {"origin": 0.0, "pitch": g.t_pitch_s, "unit": "s"},
            "x": {"origin": g.x_origin_deg, "pitch": g.x_pitch_deg, "unit": "deg"},
        },
        "units": "cd/m^2",
    })


def read_panel(path: Path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    sidecar = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    data = np.frombuffer(path.read_bytes(), dtype="<f4").reshape(sidecar["shape"])
    return data, sidecar


PANEL_ORDER = [
    "continuous_stimulus", "continuous_input_spectrum",
    "continuous_filtered_spectrum", "continuous_reconstruction",
    "sampled_stimulus", "sampled_input_spectrum",
    "sampled_filtered_spectrum", "sampled_reconstruction",
]


def write_run_outputs(result: RunResult, out_dir: Path, figures: bool = True) -> dict:
    """Persist a non-stereo run: 8 panels (bin + sidecar + PNG), report, metrics."""
    from .. import plotting
    from ..params import config_to_dict

    out = Path(out_dir)
    panels_dir = out / "panels"
    panels_dir.mkdir(parents=True, exist_ok=True)
    for name, raster in result.panel_rasters().items():
        write_raster(panels_dir / f"{name}.bin", raster)
        if figures:
            plotting.render_panel_png(raster, str(panels_dir / f"{name}.png"))
    for name, spec in result.panel_spectra().items():
        write_spectrum(panels_dir / f"{name}.bin", spec)
        if figures:
            plotting.render_panel_png(spec, str(panels_dir / f"{name}.png"))
    write_json(out / "report.json", result.report.to_dict())
    write_json(out / "metrics.json", result.metrics)
    write_json(out / "config.json", config_to_dict(result.config))
    if figures:
        plotting.render_run_figure(result, str(out / "panels.png"))
    return {"panels": PANEL_ORDER, "report": "report.json", "metrics": "metrics.json"}


def write_stereo_outputs(result: StereoRunResult, out_dir: Path, figures: bool = True) -> dict:
    """Persist a stereo run: schedule/disparity CSVs, bundle JSON, figure."""
    from .. import plotting
    from ..params import config_to_dict

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sched_lines = ["eye,onset_s,position_deg,frame_index,flash_index"]
    for e in result.schedule:
        sched_lines.append(f"{e.eye.value},{float(e.onset_s):.9f},{float(e.position_deg):.9f},"
                           f"{e.frame_index},{e.flash_index}")
    _atomic_write_bytes(out / "schedule.csv", ("\n".join(sched_lines) + "\n").encode())

    disp_lines = ["time_s,disparity_deg,pairing"]
    for s in result.series.pair_samples:
        disp_lines.append(f"{s.time_s:.9f},{s.disparity_deg:.9f},{s.pairing.value}")
    _atomic_write_bytes(out / "disparity.csv", ("\n".join(disp_lines) + "\n").encode())

    write_json(out / "bundle.json", {
        "estimate_deg": result.series.estimate_deg,
        "error_deg": result.series.error_deg,
        "nominal_deg": result.series.nominal_deg,
        "closed_form_error_deg": result.closed_form_error_deg,
        "metrics": result.metrics,
    })
    write_json(out / "metrics.json", result.metrics)
    write_json(out / "config.json", config_to_dict(result.config))
    if figures:
        plotting.render_stereo_figure(result, str(out / "disparity.png"))
    return {"schedule": "schedule.csv", "disparity": "disparity.csv", "bundle": "bundle.json"}


def write_comparison_outputs(comparison: ComparisonResult, out_dir: Path,
                             figures: bool = True) -> dict:
    from .. import plotting

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for entry in comparison.entries:
        write_difference(out / f"diff_{entry.run_id}.bin", entry.difference, comparison.reference)
    write_json(out / "comparison.json", comparison.to_dict())
    if figures:
        plotting.render_comparison_figure(comparison, str(out / "comparison.png"))
    return {"comparison": "comparison.json"}
