"""Four-step prediction pipeline and artifact classification.

Render the continuous and sampled stimuli, transform, gate through the
luminance-conditioned visibility filter, reconstruct, then read artifacts off
the surviving spectrum: replicate energy away from the n=0 ridge is judder,
replicate energy on the temporal-frequency axis is flicker, tracked smear
widening is motion blur, and per-channel centroid spread on color-sequential
displays is color breakup.

Thresholds here (gain floor, amplitude floor, half-pixel centroid separation,
1.5x blur ratio) are engineering constants, configurable via AnalysisParams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .csf import CsfModel, build_filter
from .errors import ValidationError
from .params import RgbMode, RunConfig, RunMode
from .spectrum import Spectrum, forward, imaginary_residue, inverse, replicate_index
from .stereo import (DisparitySeries, EyeEvent, disparity_error_closed_form,
                     estimate_disparity, presentation_schedule, stereo_velocity_deg_per_s)
from .stimulus import (RasterGrid, SpaceTimeRaster, build_grid, render_continuous,
                       render_for_mode)


@dataclass(frozen=True)
class PanelSet:
    stimulus: SpaceTimeRaster
    input_spectrum: Spectrum
    filtered_spectrum: Spectrum
    reconstruction: SpaceTimeRaster


@dataclass(frozen=True)
class ArtifactReport:
    flicker: bool = False
    flicker_components: tuple[tuple[int, float], ...] = ()
    judder: bool = False
    visible_replicates: int = 0
    edge_banding: bool = False
    motion_blur: bool = False
    blur_ratio: float | None = None
    color_breakup: bool = False
    centroid_separation_deg: float | None = None

    def any_artifact(self) -> bool:
        return self.flicker or self.judder or self.edge_banding or self.motion_blur or self.color_breakup

    def to_dict(self) -> dict:
        return {
            "flicker": self.flicker,
            "flicker_components": [[int(n), float(w)] for n, w in self.flicker_components],
            "judder": self.judder,
            "visible_replicates": self.visible_replicates,
            "edge_banding": self.edge_banding,
            "motion_blur": self.motion_blur,
            "blur_ratio": self.blur_ratio,
            "color_breakup": self.color_breakup,
            "centroid_separation_deg": self.centroid_separation_deg,
        }


@dataclass(frozen=True)
class RunResult:
    run_id: str
    config: RunConfig
    continuous: PanelSet
    sampled: PanelSet
    report: ArtifactReport
    metrics: dict[str, float] = field(default_factory=dict)

    def panel_rasters(self) -> dict[str, SpaceTimeRaster]:
        return {
            "continuous_stimulus": self.continuous.stimulus,
            "continuous_reconstruction": self.continuous.reconstruction,
            "sampled_stimulus": self.sampled.stimulus,
            "sampled_reconstruction": self.sampled.reconstruction,
        }

    def panel_spectra(self) -> dict[str, Spectrum]:
        return {
            "continuous_input_spectrum": self.continuous.input_spectrum,
            "continuous_filtered_spectrum": self.continuous.filtered_spectrum,
            "sampled_input_spectrum": self.sampled.input_spectrum,
            "sampled_filtered_spectrum": self.sampled.filtered_spectrum,
        }


@dataclass(frozen=True)
class StereoRunResult:
    run_id: str
    config: RunConfig
    schedule: tuple[EyeEvent, ...]
    series: DisparitySeries
    closed_form_error_deg: float
    metrics: dict[str, float] = field(default_factory=dict)


def color_breakup_offsets(v_deg_s: float, capture_hz: float) -> tuple[float, float, float]:
    """Corrective spatial shift per presentation-order channel: (i-1) v / (3c)."""
    if capture_hz <= 0:
        raise ValidationError("capture rate must be positive")
    return tuple((i - 1) * v_deg_s / (3 * capture_hz) for i in (1, 2, 3))


def _apply_filter(spec: Spectrum, gains: np.ndarray) -> Spectrum:
    return spec.with_data(spec.data * gains)


def half_peak_width(profile: np.ndarray, pitch: float) -> float:
    """Width of the region above half of (max-min), edge-interpolated."""
    p = profile - profile.min()
    peak = p.max()
    if peak <= 0:
        return 0.0
    half = peak / 2
    above = np.nonzero(p >= half)[0]
    lo, hi = int(above[0]), int(above[-1])
    left = float(lo)
    if lo > 0:
        left = lo - (p[lo] - half) / (p[lo] - p[lo - 1])
    right = float(hi)
    if hi < len(p) - 1:
        right = hi + (p[hi] - half) / (p[hi] - p[hi + 1])
    return (right - left) * pitch


def _channel_centroids(recon: SpaceTimeRaster) -> list[float]:
    x = recon.grid.x_axis()
    centroids = []
    for ch in range(recon.channels):
        profile = recon.data[ch].mean(axis=0)
        # median removes the restored-mean pedestal; squaring suppresses the
        # shared mound where blurred channels overlap
        weight = np.clip(profile - np.median(profile), 0, None) ** 2
        total = weight.sum()
        centroids.append(float((x * weight).sum() / total) if total > 0 else float("nan"))
    return centroids


def classify_artifacts(config: RunConfig,
                       sampled_input: Spectrum,
                       gains: np.ndarray,
                       recon_continuous: SpaceTimeRaster,
                       recon_sampled: SpaceTimeRaster) -> ArtifactReport:
    """Flag artifacts from surviving replicate energy and the reconstructions.

    A replicate bin is visible when its raw amplitude clears the relative
    floor and the filter gain there clears the gain threshold; judder counts
    replicates visible off the temporal-frequency axis, flicker catches them
    on it at |w| >= ws/2.
    """
    thr = config.analysis
    tracking = config.viewing.tracking
    ws = config.display.capture_rate_hz
    r_ret = 0.0 if tracking else config.velocity_deg_per_s()
    u, w = sampled_input.u_axis, sampled_input.w_axis
    uu, ww = np.meshgrid(u, w)
    n_idx = replicate_index(uu, ww, r_ret, ws)
    dist_hz = np.abs(ww + r_ret * uu - n_idx * ws)
    dw = abs(w[1] - w[0])
    on_ridge = dist_hz <= thr.ridge_halfwidth_bins * dw
    dc_col = sampled_input.dc_index[1]
    off_axis = np.ones_like(on_ridge, dtype=bool)
    off_axis[:, dc_col] = False

    visible_ns: set[int] = set()
    flicker_bins: list[tuple[int, float]] = []
    for ch in range(sampled_input.channels):
        raw = np.abs(sampled_input.data[ch])
        floor = thr.amplitude_floor_rel * raw.max()
        alive = on_ridge & (raw >= floor) & (gains[ch] >= thr.gain_threshold) & (n_idx != 0)
        judder_bins = alive & off_axis
        visible_ns.update(np.unique(n_idx[judder_bins]).tolist())
        axis_bins = alive & ~off_axis & (np.abs(ww) >= ws / 2)
        for iw in np.nonzero(axis_bins[:, dc_col])[0]:
            flicker_bins.append((int(n_idx[iw, dc_col]), float(w[iw])))

    judder = (not tracking) and bool(visible_ns)
    flicker = bool(flicker_bins)
    edge_banding = judder and config.display.flash_count > 1

    blur_ratio = None
    motion_blur = False
    if tracking:
        mid = recon_sampled.grid.nt // 2
        pitch = recon_sampled.x_pitch_deg
        width_s = half_peak_width(recon_sampled.luminance_sum()[mid], pitch)
        width_c = half_peak_width(recon_continuous.luminance_sum()[mid], pitch)
        blur_ratio = width_s / width_c if width_c > 0 else float("inf")
        motion_blur = blur_ratio > thr.blur_ratio_threshold

    color_breakup = False
    centroid_sep = None
    if config.display.rgb_mode is RgbMode.RGB_SEQ:
        cents = _channel_centroids(recon_sampled)
        seps = [abs(cents[i + 1] - cents[i]) for i in range(len(cents) - 1)]
        centroid_sep = float(max(seps))
        color_breakup = centroid_sep > config.pixel_deg() / 2

    seen = sorted(n for n in visible_ns if n != 0)
    return ArtifactReport(
        flicker=flicker,
        flicker_components=tuple(sorted(set(flicker_bins))),
        judder=judder,
        visible_replicates=len(seen),
        edge_banding=edge_banding,
        motion_blur=motion_blur,
        blur_ratio=blur_ratio,
        color_breakup=color_breakup,
        centroid_separation_deg=centroid_sep,
    )


def run_prediction(config: RunConfig) -> RunResult:
    """Full non-stereo prediction: render, transform, filter, reconstruct, classify."""
    config = config.validate()
    if config.mode is not RunMode.NON_STEREO:
        raise ValidationError("run_prediction handles NON_STEREO runs; use run_stereo", "mode")
    grid = build_grid(config)
    cont = render_continuous(config, grid)
    samp = render_for_mode(config, grid)

    spec_c = forward(cont)
    spec_s = forward(samp)

    model = CsfModel(config.mean_luminance())
    contrasts = config.display.channel_contrasts()
    gains = np.stack([
        build_filter(spec_s.u_axis, spec_s.w_axis, model, c) for c in contrasts
    ])
    filt_c = _apply_filter(spec_c, gains)
    filt_s = _apply_filter(spec_s, gains)
    recon_c = inverse(filt_c)
    recon_s = inverse(filt_s)

    report = classify_artifacts(config, spec_s, gains, recon_c, recon_s)

    ref = recon_c.luminance_sum()
    diff = recon_s.luminance_sum() - ref
    mod_energy = np.linalg.norm(ref - ref.mean())
    metrics = {
        "mean_luminance_cdm2": config.mean_luminance(),
        "csf_peak": model.peak,
        "recon_l2_rel_diff": float(np.linalg.norm(diff) / mod_energy) if mod_energy > 0 else 0.0,
        "imag_residue": max(imaginary_residue(filt_c), imaginary_residue(filt_s)),
        "visible_replicates": float(report.visible_replicates),
        "velocity_deg_per_s": config.velocity_deg_per_s(),
        "width_deg": config.width_deg(),
    }
    if report.blur_ratio is not None:
        metrics["blur_ratio"] = report.blur_ratio
    if report.centroid_separation_deg is not None:
        metrics["centroid_separation_deg"] = report.centroid_separation_deg

    return RunResult(
        run_id=config.id, config=config,
        continuous=PanelSet(cont, spec_c, filt_c, recon_c),
        sampled=PanelSet(samp, spec_s, filt_s, recon_s),
        report=report, metrics=metrics,
    )


def run_stereo(config: RunConfig) -> StereoRunResult:
    config = config.validate()
    if config.mode is not RunMode.STEREO or config.stereo is None:
        raise ValidationError("run_stereo requires STEREO mode", "mode")
    schedule = presentation_schedule(config)
    series = estimate_disparity(schedule, config.stereo.nominal_disparity_deg)
    v = stereo_velocity_deg_per_s(config.stimulus.velocity_cm_per_s, config.viewing.distance_cm)
    closed = disparity_error_closed_form(v, config.display.capture_rate_hz,
                                         config.display.flash_count)
    metrics = {
        "estimate_deg": series.estimate_deg,
        "error_deg": series.error_deg,
        "error_arcmin": series.error_deg * 60,
        "closed_form_error_deg": closed,
        "closed_form_error_arcmin": closed * 60,
        "velocity_deg_per_s": v,
        "pair_sample_count": float(len(series.pair_samples)),
    }
    return StereoRunResult(
        run_id=config.id, config=config, schedule=tuple(schedule),
        series=series, closed_form_error_deg=closed, metrics=metrics,
    )


def execute_run(config: RunConfig) -> RunResult | StereoRunResult:
    if config.mode is RunMode.STEREO:
        return run_stereo(config)
    return run_prediction(config)


# --- compare mode ----------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonEntry:
    run_id: str
    difference: np.ndarray  # run reconstruction minus reference, channel-summed
    l2_rel: float
    max_abs: float
    report: ArtifactReport


@dataclass(frozen=True)
class ComparisonResult:
    reference_id: str
    reference: SpaceTimeRaster
    entries: tuple[ComparisonEntry, ...]

    def to_dict(self) -> dict:
        return {
            "reference_id": self.reference_id,
            "entries": [
                {
                    "run_id": e.run_id,
                    "l2_rel": e.l2_rel,
                    "max_abs": e.max_abs,
                    "report": e.report.to_dict(),
                }
                for e in self.entries
            ],
        }


def resample_panel(values: np.ndarray, t_src: np.ndarray, x_src: np.ndarray,
                   t_dst: np.ndarray, x_dst: np.ndarray) -> np.ndarray:
    """Separable linear resampling of a [time x space] panel."""
    part = np.empty((len(t_src), len(x_dst)))
    for i in range(len(t_src)):
        part[i] = np.interp(x_dst, x_src, values[i])
    out = np.empty((len(t_dst), len(x_dst)))
    for j in range(len(x_dst)):
        out[:, j] = np.interp(t_dst, t_src, part[:, j])
    return out


def compare_runs(runs: list[RunResult], master: RunResult | None = None) -> ComparisonResult:
    """Difference panels of each run's sampled reconstruction against a reference.

    The reference is the master run's sampled reconstruction when given,
    otherwise the perceived continuous reconstruction of the first run.
    """
    if not runs:
        raise ValidationError("compare needs at least one run")
    modes = {r.config.mode for r in runs} | ({master.config.mode} if master else set())
    if len(modes) != 1:
        raise ValidationError("compared runs must share the run mode")
    if master is not None:
        ref_raster = master.sampled.reconstruction
        ref_id = master.run_id
    else:
        ref_raster = runs[0].continuous.reconstruction
        ref_id = f"{runs[0].run_id}:continuous"
    ref = ref_raster.luminance_sum()
    t_ref, x_ref = ref_raster.grid.t_axis(), ref_raster.grid.x_axis()
    ref_energy = np.linalg.norm(ref - ref.mean())

    entries = []
    for run in runs:
        rec = run.sampled.reconstruction
        panel = rec.luminance_sum()
        if panel.shape != ref.shape or not np.allclose(rec.grid.x_axis(), x_ref) \
                or not np.allclose(rec.grid.t_axis(), t_ref):
            panel = resample_panel(panel, rec.grid.t_axis(), rec.grid.x_axis(), t_ref, x_ref)
        diff = panel - ref
        entries.append(ComparisonEntry(
            run_id=run.run_id,
            difference=diff,
            l2_rel=float(np.linalg.norm(diff) / ref_energy) if ref_energy > 0 else 0.0,
            max_abs=float(np.abs(diff).max()),
            report=run.report,
        ))
    return ComparisonResult(reference_id=ref_id, reference=ref_raster, entries=tuple(entries))
