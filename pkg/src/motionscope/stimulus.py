"""Space-time synthesis of continuous and display-sampled moving stimuli.

Conventions
-----------
- Rasters store luminance (cd/m²) per channel on a uniform (time x space) grid;
  background samples sit at the channel's L_min.
- Illuminated sub-pixel bands carry amplitude (L_max - L_min) / fill so the
  pixel-averaged modulation equals the channel amplitude; summing RGB_SIMUL
  channels at fill 1 therefore reproduces the equivalent BW raster.
- Each presentation's temporal pulse is a unit-area trapezoid scaled by the
  capture period / flash count, so the time-averaged luminance of the sampled
  stimulus equals the continuous one (equal-mean normalization). The plateau
  is therefore ~L/h, not L.
- When the viewer tracks the stimulus, rasters are in the retinal frame: each
  capture lands at x = 0 at its frame onset and drifts at -r during the hold.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ResourceLimitError, ValidationError
from .params import RgbMode, RunConfig

MEMORY_BUDGET_ENV = "MOTIONSCOPE_MEMORY_BUDGET_BYTES"
DEFAULT_MEMORY_BUDGET = 4_000_000_000


class FrameOfReference(str, Enum):
    DISPLAY = "DISPLAY"
    RETINA = "RETINA"


@dataclass(frozen=True)
class TemporalProfile:
    """Unit-area trapezoid: linear rise over tau, plateau, linear fall over tau.

    The pulse occupies [0, base_width_s) measured from the presentation onset;
    ``plateau_level`` is 1/(base - tau) so the time integral is exactly 1.
    """

    base_width_s: float
    edge_width_s: float

    def __post_init__(self):
        if self.edge_width_s < 0:
            raise ValidationError("pixel response must be >= 0")
        if self.base_width_s < 2 * self.edge_width_s - 1e-15:
            raise ValidationError(
                "temporal profile does not fit: hold_interval * frame period must be >= "
                f"2 * pixel_response ({self.base_width_s:g} < {2 * self.edge_width_s:g})"
            )

    @property
    def plateau_level(self) -> float:
        return 1.0 / (self.base_width_s - self.edge_width_s)

    def evaluate(self, t):
        """Profile value at time ``t`` past the onset (0 outside [0, base))."""
        t = np.asarray(t, dtype=float)
        b, tau = self.base_width_s, self.edge_width_s
        p = self.plateau_level
        out = np.zeros_like(t)
        if tau > 0:
            rise = (t >= 0) & (t < tau)
            out[rise] = p * t[rise] / tau
            fall = (t >= b - tau) & (t < b)
            out[fall] = p * (b - t[fall]) / tau
            flat = (t >= tau) & (t < b - tau)
            out[flat] = p
        else:
            out[(t >= 0) & (t < b)] = p
        return out

    def samples(self, n: int) -> np.ndarray:
        """Profile sampled at n uniform points across one base width."""
        return self.evaluate(np.arange(n) * (self.base_width_s / n))


def temporal_profile(h: float, frame_s: float, tau_s: float) -> TemporalProfile:
    """Pulse for one presentation slot: base h*frame_s, edges tau_s each."""
    if not 0 <= h <= 1:
        raise ValidationError("hold interval must lie in [0, 1]")
    return TemporalProfile(base_width_s=h * frame_s, edge_width_s=tau_s)


@dataclass(frozen=True)
class SpatialKernel:
    """Illuminated sub-pixel bands of a stimulus of width X, centered at 0.

    Bands are (left, right) offsets from the stimulus center: the fill-factor
    comb rect((x - kp)/(f p)) clipped to the object rect(x/X). ``density``
    follows the 1/X rect normalization (unmasked rect integrates to 1).
    """

    width_deg: float
    pixel_deg: float
    fill: float
    bands: tuple[tuple[float, float], ...]

    @property
    def lit_length_deg(self) -> float:
        return sum(b - a for a, b in self.bands)

    def mask(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x, dtype=bool)
        for a, b in self.bands:
            out |= (x >= a) & (x < b)
        return out

    def density(self, x):
        return self.mask(x) / self.width_deg


def spatial_kernel(width_deg: float, pixel_deg: float, fill: float,
                   center_offset: float = 0.0) -> SpatialKernel:
    """Kernel bands at k*pixel + center_offset, clipped to the object rect.

    RGB channels pass offsets of (i-1)*pixel/3 so the three sub-pixel combs
    tile each pixel exactly.
    """
    if not 0 < fill <= 1:
        raise ValidationError("fill factor must lie in (0, 1]")
    if width_deg < fill * pixel_deg:
        raise ValidationError(
            "stimulus narrower than one illuminated sub-pixel "
            f"(width {width_deg:g} deg < fill * pixel {fill * pixel_deg:g} deg)"
        )
    half = width_deg / 2
    bw = fill * pixel_deg
    k_lo = math.ceil((-half - bw / 2 - center_offset) / pixel_deg)
    k_hi = math.floor((half + bw / 2 - center_offset) / pixel_deg)
    bands = []
    for k in range(k_lo, k_hi + 1):
        a = max(k * pixel_deg + center_offset - bw / 2, -half)
        b = min(k * pixel_deg + center_offset + bw / 2, half)
        if b - a > 1e-12 * pixel_deg:
            bands.append((a, b))
    return SpatialKernel(width_deg=width_deg, pixel_deg=pixel_deg, fill=fill, bands=tuple(bands))


@dataclass(frozen=True)
class RasterGrid:
    """Uniform sampling grid shared by the continuous and sampled paths."""

    nt: int
    nx: int
    t_pitch_s: float
    x_pitch_deg: float
    x_origin_deg: float
    n_frames: int
    frame_period_s: float

    def t_axis(self) -> np.ndarray:
        return np.arange(self.nt) * self.t_pitch_s

    def x_axis(self) -> np.ndarray:
        return self.x_origin_deg + np.arange(self.nx) * self.x_pitch_deg

    @property
    def duration_s(self) -> float:
        return self.nt * self.t_pitch_s

    @property
    def extent_deg(self) -> float:
        return self.nx * self.x_pitch_deg


@dataclass(frozen=True)
class SpaceTimeRaster:
    """Discretized luminance distribution, [channels x time x space]."""

    data: np.ndarray
    grid: RasterGrid
    frame_of_reference: FrameOfReference
    channel_backgrounds: tuple[float, ...]

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def x_pitch_deg(self) -> float:
        return self.grid.x_pitch_deg

    @property
    def t_pitch_s(self) -> float:
        return self.grid.t_pitch_s

    @property
    def x_origin_deg(self) -> float:
        return self.grid.x_origin_deg

    def luminance_sum(self) -> np.ndarray:
        """Channel-summed luminance, [time x space]."""
        return self.data.sum(axis=0)


def _memory_budget() -> int:
    return int(os.environ.get(MEMORY_BUDGET_ENV, DEFAULT_MEMORY_BUDGET))


def build_grid(config: RunConfig) -> RasterGrid:
    disp, stim = config.display, config.stimulus
    frame = disp.frame_period_s
    n_frames = max(1, round(stim.recording_length_s * disp.capture_rate_hz))
    duration = n_frames * frame

    s = config.grid.temporal_samples_per_frame
    # keep samples-per-illuminated-slot constant: slots shrink with flashes
    # and with the color-sequential sub-frame
    s *= disp.flash_count * (3 if disp.rgb_mode is RgbMode.RGB_SEQ else 1)
    tau = disp.pixel_response_s
    if tau > 0:
        s = max(s, math.ceil(2 * frame / tau))
    nt = config.grid.time_samples or n_frames * s
    t_pitch = duration / nt

    r = config.velocity_deg_per_s()
    width = config.width_deg()
    margin = 0.5 * config.grid.padding_factor
    if config.viewing.tracking:
        smear = abs(r) * frame
        x_lo = -(smear + width / 2 + margin)
        x_hi = width / 2 + smear + margin
    else:
        x_lo = min(0.0, r * duration) - width / 2 - margin
        x_hi = max(0.0, r * duration) + width / 2 + margin
    extent = x_hi - x_lo

    if config.grid.space_samples:
        nx = config.grid.space_samples
        x_pitch = extent / nx
    else:
        # RGB sub-pixel bands are a third of a pixel; keep samples-per-band constant
        per_pixel = config.grid.spatial_samples_per_pixel * (1 if disp.channel_count == 1 else 3)
        x_pitch = config.pixel_deg() / per_pixel
        nx = math.ceil(extent / x_pitch)

    channels = disp.channel_count
    est_bytes = nt * nx * channels * 16 * 6  # rasters + complex spectra, both paths
    if est_bytes > _memory_budget():
        raise ResourceLimitError(
            f"grid {nt}x{nx}x{channels} needs ~{est_bytes/1e9:.1f} GB "
            f"(> budget {_memory_budget()/1e9:.1f} GB); decrease the recording length "
            "or coarsen the grid"
        )
    return RasterGrid(
        nt=nt, nx=nx, t_pitch_s=t_pitch, x_pitch_deg=x_pitch,
        x_origin_deg=x_lo, n_frames=n_frames, frame_period_s=frame,
    )


def _channel_shifts_deg(config: RunConfig) -> tuple[float, ...]:
    """Sub-pixel anchor per channel: adjacent channels sit pixel/3 apart,
    centered so the three combs tile the BW pixel footprint exactly."""
    if config.display.rgb_mode is RgbMode.BW:
        return (0.0,)
    p = config.pixel_deg()
    return tuple((i - 1) * p / 3 for i in range(3))


def _channel_time_shifts(config: RunConfig) -> tuple[float, ...]:
    if config.display.rgb_mode is not RgbMode.RGB_SEQ:
        return (0.0,) * config.display.channel_count
    sub = config.display.frame_period_s / (3 * config.display.flash_count)
    return tuple(i * sub for i in range(3))


def _channel_kernels(config: RunConfig) -> list[SpatialKernel]:
    f_eff = config.display.fill_factor / config.display.channel_count
    return [
        spatial_kernel(config.width_deg(), config.pixel_deg(), f_eff, center_offset=shift)
        for shift in _channel_shifts_deg(config)
    ]


def _amplitudes(config: RunConfig) -> tuple[float, ...]:
    f_eff = config.display.fill_factor / config.display.channel_count
    lm = config.channel_l_max()
    return tuple((lm - bg) / f_eff for bg in config.channel_backgrounds())


def _empty_raster(config: RunConfig, grid: RasterGrid) -> np.ndarray:
    data = np.empty((config.display.channel_count, grid.nt, grid.nx))
    for ch, bg in enumerate(config.channel_backgrounds()):
        data[ch].fill(bg)
    return data


def render_continuous(config: RunConfig, grid: RasterGrid | None = None) -> SpaceTimeRaster:
    """Continuously lit stimulus: band at x = r t (or fixed at 0 when tracked)."""
    grid = grid or build_grid(config)
    kernels = _channel_kernels(config)
    amps = _amplitudes(config)
    tracking = config.viewing.tracking
    r = 0.0 if tracking else config.velocity_deg_per_s()

    x = grid.x_axis()
    t = grid.t_axis()
    data = _empty_raster(config, grid)
    centers = r * t
    for ch in range(data.shape[0]):
        delta = np.zeros((grid.nt, grid.nx + 1))
        for a, b in kernels[ch].bands:
            li = np.searchsorted(x, centers + a, side="left")
            ri = np.searchsorted(x, centers + b, side="left")
            rows = np.arange(grid.nt)
            np.add.at(delta, (rows, li), amps[ch])
            np.add.at(delta, (rows, ri), -amps[ch])
        data[ch] += np.cumsum(delta, axis=1)[:, :-1]
    return SpaceTimeRaster(
        data=data, grid=grid,
        frame_of_reference=FrameOfReference.RETINA if tracking else FrameOfReference.DISPLAY,
        channel_backgrounds=config.channel_backgrounds(),
    )


def _presentations(config: RunConfig, grid: RasterGrid):
    """Yield (channel, onset_s, display_position_deg) per illuminated pulse."""
    disp = config.display
    r = config.velocity_deg_per_s()
    frame = grid.frame_period_s
    t_shifts = _channel_time_shifts(config)
    offsets = _breakup_offsets_deg(config) if (disp.breakup_correction and config.viewing.tracking) else (0.0,) * disp.channel_count
    for n in range(grid.n_frames):
        pos = r * n * frame
        for j in range(disp.flash_count):
            onset = (n + j / disp.flash_count) * frame
            for ch in range(disp.channel_count):
                yield ch, onset + t_shifts[ch], pos + offsets[ch]


def _breakup_offsets_deg(config: RunConfig) -> tuple[float, ...]:
    # corrective shift grows with presentation order, scaled by flash count so
    # it matches the per-channel retinal offset v * slot of the actual schedule
    if config.display.rgb_mode is not RgbMode.RGB_SEQ:
        return (0.0,) * config.display.channel_count
    v = config.velocity_deg_per_s()
    c_eff = config.display.capture_rate_hz * config.display.flash_count
    return tuple(i * v / (3 * c_eff) for i in range(3))


def pulse_row_window(onset: float, base: float, t_pitch: float, nt: int) -> tuple[int, int]:
    """Grid rows covered by [onset, onset + base), guarded against float dust
    so a pulse of exactly k pitches always covers k rows."""
    guard = 1e-9
    r0 = max(0, math.ceil(onset / t_pitch - guard))
    r1 = min(nt, math.ceil((onset + base) / t_pitch - guard))
    return r0, r1


def _paint_presentation(data_ch, grid, t_axis, x_axis, profile, scale, amp, bands,
                        onset, band_shift, drift_rate):
    """Accumulate one pulse into a channel raster.

    ``band_shift`` positions the kernel; when ``drift_rate`` is nonzero the
    kernel slides at that rate during the pulse (retinal smear while tracking).
    """
    base = profile.base_width_s
    r0, r1 = pulse_row_window(onset, base, grid.t_pitch_s, grid.nt)
    if r1 <= r0:
        # pulse narrower than the grid pitch: unit-area impulse on nearest row
        idx = int(round(onset / grid.t_pitch_s))
        if not 0 <= idx < grid.nt:
            return
        rows = np.array([idx])
        w = np.array([1.0 / grid.t_pitch_s]) * scale * amp
    else:
        rows = np.arange(r0, r1)
        w = profile.evaluate(t_axis[rows] - onset) * scale * amp
    shift = band_shift + drift_rate * (t_axis[rows] - onset)
    for a, b in bands:
        li = np.searchsorted(x_axis, a + shift, side="left")
        ri = np.searchsorted(x_axis, b + shift, side="left")
        np.add.at(data_ch, (rows, li), w)
        np.add.at(data_ch, (rows, ri), -w)


def _render_pulsed(config: RunConfig, grid: RasterGrid, tracking: bool) -> SpaceTimeRaster:
    disp = config.display
    kernels = _channel_kernels(config)
    amps = _amplitudes(config)
    profile = temporal_profile(disp.hold_interval, disp.slot_period_s(), disp.pixel_response_s)
    scale = grid.frame_period_s / disp.flash_count  # equal-mean scaling per pulse
    r = config.velocity_deg_per_s()

    t_axis, x_axis = grid.t_axis(), grid.x_axis()
    frame = FrameOfReference.RETINA if tracking else FrameOfReference.DISPLAY
    data = _empty_raster(config, grid)
    deltas = np.zeros((data.shape[0], grid.nt, grid.nx + 1))
    for ch, onset, pos in _presentations(config, grid):
        band_shift = pos - r * onset if tracking else pos
        drift = -r if tracking else 0.0
        _paint_presentation(deltas[ch], grid, t_axis, x_axis, profile, scale,
                            amps[ch], kernels[ch].bands, onset, band_shift, drift)
    data += np.cumsum(deltas, axis=2)[:, :, :-1]
    return SpaceTimeRaster(data=data, grid=grid, frame_of_reference=frame,
                           channel_backgrounds=config.channel_backgrounds())


def render_sampled(config: RunConfig, grid: RasterGrid | None = None) -> SpaceTimeRaster:
    """Display-sampled stimulus in the display frame (eye stationary)."""
    grid = grid or build_grid(config)
    return _render_pulsed(config, grid, tracking=False)


def render_sampled_tracking(config: RunConfig, grid: RasterGrid | None = None) -> SpaceTimeRaster:
    """Display-sampled stimulus on the retina of an eye tracking at the stimulus speed.

    Each pulse lands at retinal x = 0 at its capture's frame onset (plus any
    RGB sub-pixel or corrective shifts) and drifts at -r while lit. With
    multi-flash, later flashes of a frame land progressively behind, which is
    the edge-banding geometry.
    """
    if not config.viewing.tracking:
        raise ValidationError("render_sampled_tracking requires viewing.tracking = true")
    grid = grid or build_grid(config)
    return _render_pulsed(config, grid, tracking=True)


def render_for_mode(config: RunConfig, grid: RasterGrid | None = None) -> SpaceTimeRaster:
    """Sampled raster in the frame of reference implied by the viewing parameters."""
    if config.viewing.tracking:
        return render_sampled_tracking(config, grid)
    return render_sampled(config, grid)
