"""Matplotlib figure rendering for the report path.

Rasters are drawn position-vs-time (time on the abscissa), spectra as
log-magnitude maps with temporal frequency on the abscissa and spatial
frequency on the ordinate.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .pipeline import ComparisonResult, RunResult, StereoRunResult
from .spectrum import Spectrum
from .stimulus import SpaceTimeRaster


def _raster_image(raster: SpaceTimeRaster) -> np.ndarray:
    data = raster.data
    lo, hi = data.min(), data.max()
    norm = (data - lo) / (hi - lo) if hi > lo else np.zeros_like(data)
    if raster.channels == 3:
        return np.transpose(norm, (2, 1, 0))  # (x, t, rgb)
    return norm[0].T


def _raster_extent(raster: SpaceTimeRaster):
    g = raster.grid
    return [0.0, g.duration_s, g.x_origin_deg, g.x_origin_deg + g.extent_deg]


def plot_raster(ax, raster: SpaceTimeRaster, title: str) -> None:
    img = _raster_image(raster)
    kw = {} if raster.channels == 3 else {"cmap": "gray"}
    ax.imshow(img, origin="lower", aspect="auto", extent=_raster_extent(raster),
              interpolation="nearest", **kw)
    ax.set_xlabel("time (s)")
    ylabel = "retinal position (deg)" if raster.frame_of_reference.value == "RETINA" else "position (deg)"
    ax.set_ylabel(ylabel)
    ax.set_title(title)


def plot_spectrum(ax, spec: Spectrum, title: str, floor_db: float = -60.0) -> None:
    mag = spec.magnitude().sum(axis=0).T  # (u, w)
    peak = mag.max() or 1.0
    img = 20 * np.log10(np.maximum(mag / peak, 10 ** (floor_db / 20)))
    ax.imshow(img, origin="lower", aspect="auto",
              extent=[spec.w_axis[0], spec.w_axis[-1], spec.u_axis[0], spec.u_axis[-1]],
              cmap="magma", interpolation="nearest")
    ax.set_xlabel("temporal frequency (Hz)")
    ax.set_ylabel("spatial frequency (cpd)")
    ax.set_title(title)


def render_run_figure(result: RunResult, path: str) -> None:
    """Side-by-side panel grid: continuous row above sampled row."""
    fig, axes = plt.subplots(2, 4, figsize=(16, 7))
    for row, (label, pset) in enumerate([("continuous", result.continuous),
                                         ("sampled", result.sampled)]):
        plot_raster(axes[row, 0], pset.stimulus, f"{label} stimulus")
        plot_spectrum(axes[row, 1], pset.input_spectrum, f"{label} input spectrum")
        plot_spectrum(axes[row, 2], pset.filtered_spectrum, f"{label} filtered spectrum")
        plot_raster(axes[row, 3], pset.reconstruction, f"{label} reconstruction")
    flags = [k for k, v in result.report.to_dict().items()
             if isinstance(v, bool) and v]
    fig.suptitle(f"run {result.run_id or '(unnamed)'} — artifacts: {', '.join(flags) or 'none'}")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_panel_png(obj, path: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    if isinstance(obj, SpaceTimeRaster):
        plot_raster(ax, obj, "")
    else:
        plot_spectrum(ax, obj, "")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_stereo_figure(result: StereoRunResult, path: str) -> None:
    """Presentation schedule on top, pairing disparities and the estimate below."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(9, 7), sharex=True)
    for eye, color in (("LEFT", "tab:red"), ("RIGHT", "tab:blue")):
        ev = [e for e in result.schedule if e.eye.value == eye]
        ax1.plot([float(e.onset_s) for e in ev], [float(e.position_deg) for e in ev],
                 ".", color=color, label=f"{eye.lower()} eye", markersize=4)
    ax1.set_ylabel("position (deg)")
    ax1.legend(loc="upper left")
    ax1.set_title("presentation schedule")

    ts = [s.time_s for s in result.series.pair_samples]
    ds = [s.disparity_deg * 60 for s in result.series.pair_samples]
    ax2.plot(ts, ds, ".", color="tab:green", markersize=5, label="pairing disparities")
    ax2.axhline(result.series.estimate_deg * 60, linestyle="--", color="k",
                label=f"estimate {result.series.estimate_deg * 60:.2f}'")
    ax2.axhline(result.series.nominal_deg * 60, linestyle=":", color="gray", label="nominal")
    ax2.set_xlabel("time (s)")
    ax2.set_ylabel("disparity (arcmin)")
    ax2.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_comparison_figure(comparison: ComparisonResult, path: str) -> None:
    n = len(comparison.entries)
    fig, axes = plt.subplots(1, n + 1, figsize=(4.5 * (n + 1), 4), squeeze=False)
    plot_raster(axes[0, 0], comparison.reference, f"reference ({comparison.reference_id})")
    g = comparison.reference.grid
    extent = [0.0, g.duration_s, g.x_origin_deg, g.x_origin_deg + g.extent_deg]
    for i, entry in enumerate(comparison.entries):
        ax = axes[0, i + 1]
        lim = np.abs(entry.difference).max() or 1.0
        ax.imshow(entry.difference.T, origin="lower", aspect="auto", extent=extent,
                  cmap="coolwarm", vmin=-lim, vmax=lim, interpolation="nearest")
        ax.set_title(f"{entry.run_id} − ref (L2 rel {entry.l2_rel:.3f})")
        ax.set_xlabel("time (s)")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_csf_figure(luminances_cdm2, path: str) -> None:
    """Temporal-sensitivity family and a combined-surface contour pair."""
    from .csf import OMEGA_FLOOR_HZ, CsfModel, luminance_to_trolands

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(12, 4.5))
    w = np.geomspace(OMEGA_FLOOR_HZ, 90, 300)
    for L in luminances_cdm2:
        model = CsfModel(L)
        ax1.loglog(w, model.temporal(w), label=f"{luminance_to_trolands(L):.0f} Td")
    ax1.set_xlabel("temporal frequency (Hz)")
    ax1.set_ylabel("contrast sensitivity")
    ax1.set_title("temporal sensitivity by retinal illuminance")
    ax1.legend(fontsize=8)

    u = np.geomspace(0.2, 60, 120)
    wq = np.geomspace(OMEGA_FLOOR_HZ, 90, 120)
    for L, style in ((min(luminances_cdm2), "--"), (max(luminances_cdm2), "-")):
        model = CsfModel(L)
        cs = np.sqrt(np.outer(model.temporal(wq), model.spatial(u)))
        ax2.contour(wq, u, np.log10(np.maximum(cs, 1e-3)).T,
                    levels=[0, 0.5, 1, 1.5, 2], linestyles=style)
    ax2.set_xscale("log")
    ax2.set_yscale("log")
    ax2.set_xlabel("temporal frequency (Hz)")
    ax2.set_ylabel("spatial frequency (cpd)")
    ax2.set_title("iso-sensitivity contours (low vs high luminance)")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
