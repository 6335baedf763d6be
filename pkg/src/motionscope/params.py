"""User-facing parameters: validation, unit conversion, derived quantities.

All angles are degrees, time is seconds, luminance is cd/m². Lengths on the
display are converted to visual angle with the full-angle subtense
2·atan(w/2D); velocities convert by applying that to the one-second
displacement.
"""

from __future__ import annotations

import math
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .errors import ValidationError

FOVEA_DIAMETER_DEG = 5.0
FOVEA_AREA_DEG2 = math.pi * FOVEA_DIAMETER_DEG**2 / 4

CM_PER_INCH = 2.54


class RgbMode(str, Enum):
    BW = "BW"
    RGB_SEQ = "RGB_SEQ"
    RGB_SIMUL = "RGB_SIMUL"


class RunMode(str, Enum):
    NON_STEREO = "NON_STEREO"
    STEREO = "STEREO"


class StereoTiming(str, Enum):
    SIMULTANEOUS = "SIMULTANEOUS"
    ALTERNATING = "ALTERNATING"


class Eye(str, Enum):
    LEFT = "LEFT"
    RIGHT = "RIGHT"


class Backend(str, Enum):
    AUTO = "auto"
    CPU = "cpu"
    ACCELERATOR = "accelerator"


def cm_to_deg(length_cm: float, distance_cm: float) -> float:
    """Visual angle in degrees subtended by ``length_cm`` at ``distance_cm``."""
    if distance_cm <= 0:
        raise ValidationError("viewing distance must be positive", "viewing.distance_cm")
    return math.degrees(2 * math.atan(length_cm / (2 * distance_cm)))


def velocity_cm_to_deg(velocity_cm_per_s: float, distance_cm: float) -> float:
    """Angular speed (deg/s) of the one-second displacement, full-angle convention."""
    return cm_to_deg(velocity_cm_per_s, distance_cm)


def background_luminance(l_max: float, contrast: float) -> float:
    """Background level L_min = L_max / (1 + C) for Weber contrast C."""
    if l_max <= 0:
        raise ValidationError("l_max must be positive", "stimulus.l_max")
    if contrast < 0:
        raise ValidationError("contrast must be non-negative", "display.contrast")
    return l_max / (1 + contrast)


def mean_foveal_luminance(l_max: float, l_min: float, width_deg: float) -> float:
    """Average luminance across the fovea for a bright band on a background.

    The band covers width × fovea-diameter of the foveal area; the width is
    clamped to S/D so the band never exceeds the fovea (wide stimuli fill it).
    """
    if l_min < 0 or l_max < l_min:
        raise ValidationError("need l_max >= l_min >= 0")
    if width_deg < 0:
        raise ValidationError("width must be non-negative", "stimulus.width_cm")
    x = min(width_deg, FOVEA_AREA_DEG2 / FOVEA_DIAMETER_DEG)
    s, d = FOVEA_AREA_DEG2, FOVEA_DIAMETER_DEG
    return (l_max * x * d + l_min * (s - x * d)) / s


@dataclass(frozen=True)
class StimulusParams:
    velocity_cm_per_s: float = 1.0
    width_cm: float = 0.1
    recording_length_s: float = 0.5
    l_max: float = 100.0

    def validate(self) -> None:
        if self.recording_length_s <= 0:
            raise ValidationError("recording_length_s must be > 0", "stimulus.recording_length_s")
        if self.width_cm <= 0:
            raise ValidationError("width_cm must be > 0", "stimulus.width_cm")
        if self.l_max <= 0:
            raise ValidationError("l_max must be > 0", "stimulus.l_max")


@dataclass(frozen=True)
class DisplayParams:
    flash_count: int = 1
    rgb_mode: RgbMode = RgbMode.BW
    capture_rate_hz: float = 120.0
    hold_interval: float = 0.5
    pixel_response_s: float = 0.0
    dpi: float = 300.0
    fill_factor: float = 1.0
    contrast: tuple[float, ...] = (100.0,)
    breakup_correction: bool = False

    @property
    def frame_period_s(self) -> float:
        return 1.0 / self.capture_rate_hz

    @property
    def presentation_rate_hz(self) -> float:
        return self.capture_rate_hz * self.flash_count

    @property
    def channel_count(self) -> int:
        return 1 if self.rgb_mode is RgbMode.BW else 3

    def slot_period_s(self) -> float:
        """Duration of one illuminated slot (frame / flashes, /3 when color-sequential)."""
        slot = self.frame_period_s / self.flash_count
        if self.rgb_mode is RgbMode.RGB_SEQ:
            slot /= 3
        return slot

    def channel_contrasts(self) -> tuple[float, ...]:
        n = self.channel_count
        if len(self.contrast) == n:
            return self.contrast
        if len(self.contrast) == 1:
            return self.contrast * n
        raise ValidationError(
            f"contrast needs 1 or {n} values for {self.rgb_mode.value}", "display.contrast"
        )

    def validate(self) -> None:
        if self.flash_count < 1:
            raise ValidationError("flash_count must be >= 1", "display.flash_count")
        if self.capture_rate_hz <= 0:
            raise ValidationError("capture_rate_hz must be > 0", "display.capture_rate_hz")
        if not 0 <= self.hold_interval <= 1:
            raise ValidationError("hold_interval must lie in [0, 1]", "display.hold_interval")
        if not 0 < self.fill_factor <= 1:
            raise ValidationError("fill_factor must lie in (0, 1]", "display.fill_factor")
        if self.dpi <= 0:
            raise ValidationError("dpi must be > 0", "display.dpi")
        if self.pixel_response_s < 0:
            raise ValidationError("pixel_response_s must be >= 0", "display.pixel_response_s")
        for c in self.channel_contrasts():
            if c <= 0:
                raise ValidationError("contrast must be > 0", "display.contrast")
        # trapezoid must fit inside the illuminated part of a slot
        if self.pixel_response_s > 0:
            limit = self.hold_interval * self.slot_period_s() / 2
            if self.pixel_response_s > limit + 1e-15:
                raise ValidationError(
                    "pixel_response_s must satisfy pixel_response_s <= "
                    "hold_interval * slot_period / 2 "
                    f"({self.pixel_response_s:g} > {limit:g})",
                    "display.pixel_response_s",
                )

    def pixel_pitch_cm(self) -> float:
        return CM_PER_INCH / self.dpi


@dataclass(frozen=True)
class ViewingParams:
    distance_cm: float = 50.0
    tracking: bool = False

    def validate(self) -> None:
        if self.distance_cm <= 0:
            raise ValidationError("distance_cm must be > 0", "viewing.distance_cm")


@dataclass(frozen=True)
class StereoParams:
    capture_mode: StereoTiming = StereoTiming.SIMULTANEOUS
    presentation_mode: StereoTiming = StereoTiming.ALTERNATING
    nominal_disparity_deg: float = 0.0
    first_eye: Eye = Eye.LEFT

    def validate(self) -> None:
        pass


@dataclass(frozen=True)
class GridSpec:
    """Discretization controls.

    ``time_samples``/``space_samples`` force exact grid sizes (pitches are then
    derived from the recording length and spatial extent); otherwise sizing
    follows samples-per-frame and samples-per-pixel.
    """

    spatial_samples_per_pixel: int = 4
    temporal_samples_per_frame: int = 16
    padding_factor: float = 1.0
    time_samples: int | None = None
    space_samples: int | None = None

    def validate(self) -> None:
        if self.spatial_samples_per_pixel < 2:
            raise ValidationError("spatial_samples_per_pixel must be >= 2", "grid.spatial_samples_per_pixel")
        if self.temporal_samples_per_frame < 4:
            raise ValidationError("temporal_samples_per_frame must be >= 4", "grid.temporal_samples_per_frame")
        if self.padding_factor < 1:
            raise ValidationError("padding_factor must be >= 1", "grid.padding_factor")
        for name in ("time_samples", "space_samples"):
            v = getattr(self, name)
            if v is not None and v < 8:
                raise ValidationError(f"{name} must be >= 8 when given", f"grid.{name}")


@dataclass(frozen=True)
class AnalysisParams:
    """Engineering thresholds for artifact classification (paper states none)."""

    gain_threshold: float = 0.02
    amplitude_floor_rel: float = 0.02
    ridge_halfwidth_bins: int = 2
    blur_ratio_threshold: float = 1.5
    no_artifact_l2_rel: float = 0.1

    def validate(self) -> None:
        if not 0 < self.gain_threshold <= 1:
            raise ValidationError("gain_threshold must lie in (0, 1]", "analysis.gain_threshold")
        if not 0 < self.amplitude_floor_rel < 1:
            raise ValidationError("amplitude_floor_rel must lie in (0, 1)", "analysis.amplitude_floor_rel")
        if self.ridge_halfwidth_bins < 1:
            raise ValidationError("ridge_halfwidth_bins must be >= 1", "analysis.ridge_halfwidth_bins")
        if self.blur_ratio_threshold <= 1:
            raise ValidationError("blur_ratio_threshold must be > 1", "analysis.blur_ratio_threshold")


@dataclass(frozen=True)
class RunConfig:
    stimulus: StimulusParams = field(default_factory=StimulusParams)
    display: DisplayParams = field(default_factory=DisplayParams)
    viewing: ViewingParams = field(default_factory=ViewingParams)
    stereo: StereoParams | None = None
    mode: RunMode = RunMode.NON_STEREO
    grid: GridSpec = field(default_factory=GridSpec)
    analysis: AnalysisParams = field(default_factory=AnalysisParams)
    backend: Backend = Backend.AUTO
    id: str = ""

    def validate(self) -> "RunConfig":
        self.stimulus.validate()
        self.display.validate()
        self.viewing.validate()
        self.grid.validate()
        self.analysis.validate()
        if self.mode is RunMode.STEREO:
            if self.stereo is None:
                raise ValidationError("stereo parameters required in STEREO mode", "stereo")
            self.stereo.validate()
        elif self.stereo is not None:
            raise ValidationError("stereo parameters only allowed in STEREO mode", "stereo")
        if self.width_deg() < self.display.fill_factor / self.display.channel_count * self.pixel_deg():
            raise ValidationError(
                "stimulus narrower than one illuminated sub-pixel", "stimulus.width_cm"
            )
        return self

    # derived angular quantities -------------------------------------------------

    def velocity_deg_per_s(self) -> float:
        return velocity_cm_to_deg(self.stimulus.velocity_cm_per_s, self.viewing.distance_cm)

    def width_deg(self) -> float:
        return cm_to_deg(self.stimulus.width_cm, self.viewing.distance_cm)

    def pixel_deg(self) -> float:
        return cm_to_deg(self.display.pixel_pitch_cm(), self.viewing.distance_cm)

    def channel_l_max(self) -> float:
        return self.stimulus.l_max / self.display.channel_count

    def channel_backgrounds(self) -> tuple[float, ...]:
        lm = self.channel_l_max()
        return tuple(background_luminance(lm, c) for c in self.display.channel_contrasts())

    def total_background(self) -> float:
        return sum(self.channel_backgrounds())

    def mean_luminance(self) -> float:
        return mean_foveal_luminance(self.stimulus.l_max, self.total_background(), self.width_deg())

    def with_id(self, run_id: str | None = None) -> "RunConfig":
        from dataclasses import replace

        return replace(self, id=run_id or uuid.uuid4().hex[:12])


# JSON (de)serialization ----------------------------------------------------------

SCHEMA_VERSION = 1


def config_to_dict(config: RunConfig) -> dict[str, Any]:
    d: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "id": config.id,
        "mode": config.mode.value,
        "backend": config.backend.value,
        "stimulus": {
            "velocity_cm_per_s": config.stimulus.velocity_cm_per_s,
            "width_cm": config.stimulus.width_cm,
            "recording_length_s": config.stimulus.recording_length_s,
            "l_max": config.stimulus.l_max,
        },
        "display": {
            "flash_count": config.display.flash_count,
            "rgb_mode": config.display.rgb_mode.value,
            "capture_rate_hz": config.display.capture_rate_hz,
            "hold_interval": config.display.hold_interval,
            "pixel_response_s": config.display.pixel_response_s,
            "dpi": config.display.dpi,
            "fill_factor": config.display.fill_factor,
            "contrast": list(config.display.contrast),
            "breakup_correction": config.display.breakup_correction,
        },
        "viewing": {
            "distance_cm": config.viewing.distance_cm,
            "tracking": config.viewing.tracking,
        },
        "grid": {
            "spatial_samples_per_pixel": config.grid.spatial_samples_per_pixel,
            "temporal_samples_per_frame": config.grid.temporal_samples_per_frame,
            "padding_factor": config.grid.padding_factor,
            "time_samples": config.grid.time_samples,
            "space_samples": config.grid.space_samples,
        },
        "analysis": {
            "gain_threshold": config.analysis.gain_threshold,
            "amplitude_floor_rel": config.analysis.amplitude_floor_rel,
            "ridge_halfwidth_bins": config.analysis.ridge_halfwidth_bins,
            "blur_ratio_threshold": config.analysis.blur_ratio_threshold,
            "no_artifact_l2_rel": config.analysis.no_artifact_l2_rel,
        },
    }
    if config.stereo is not None:
        d["stereo"] = {
            "capture_mode": config.stereo.capture_mode.value,
            "presentation_mode": config.stereo.presentation_mode.value,
            "nominal_disparity_deg": config.stereo.nominal_disparity_deg,
            "first_eye": config.stereo.first_eye.value,
        }
    return d


def _require(d: dict, key: str, where: str) -> Any:
    if key not in d:
        raise ValidationError(f"missing field {where}.{key}" if where else f"missing field {key}",
                              f"{where}.{key}" if where else key)
    return d[key]


def config_from_dict(d: dict[str, Any]) -> RunConfig:
    try:
        stim = d.get("stimulus", {})
        disp = d.get("display", {})
        view = d.get("viewing", {})
        grid = d.get("grid", {})
        ana = d.get("analysis", {})
        contrast = disp.get("contrast", 100.0)
        if isinstance(contrast, (int, float)):
            contrast = (float(contrast),)
        else:
            contrast = tuple(float(c) for c in contrast)
        mode = RunMode(d.get("mode", "NON_STEREO"))
        stereo = None
        if "stereo" in d and d["stereo"] is not None:
            s = d["stereo"]
            stereo = StereoParams(
                capture_mode=StereoTiming(s.get("capture_mode", "SIMULTANEOUS")),
                presentation_mode=StereoTiming(s.get("presentation_mode", "ALTERNATING")),
                nominal_disparity_deg=float(s.get("nominal_disparity_deg", 0.0)),
                first_eye=Eye(s.get("first_eye", "LEFT")),
            )
        config = RunConfig(
            stimulus=StimulusParams(
                velocity_cm_per_s=float(stim.get("velocity_cm_per_s", 1.0)),
                width_cm=float(stim.get("width_cm", 0.1)),
                recording_length_s=float(stim.get("recording_length_s", 0.5)),
                l_max=float(stim.get("l_max", 100.0)),
            ),
            display=DisplayParams(
                flash_count=int(disp.get("flash_count", 1)),
                rgb_mode=RgbMode(disp.get("rgb_mode", "BW")),
                capture_rate_hz=float(disp.get("capture_rate_hz", 120.0)),
                hold_interval=float(disp.get("hold_interval", 0.5)),
                pixel_response_s=float(disp.get("pixel_response_s", 0.0)),
                dpi=float(disp.get("dpi", 300.0)),
                fill_factor=float(disp.get("fill_factor", 1.0)),
                contrast=contrast,
                breakup_correction=bool(disp.get("breakup_correction", False)),
            ),
            viewing=ViewingParams(
                distance_cm=float(view.get("distance_cm", 50.0)),
                tracking=bool(view.get("tracking", False)),
            ),
            stereo=stereo,
            mode=mode,
            grid=GridSpec(
                spatial_samples_per_pixel=int(grid.get("spatial_samples_per_pixel", 4)),
                temporal_samples_per_frame=int(grid.get("temporal_samples_per_frame", 16)),
                padding_factor=float(grid.get("padding_factor", 1.0)),
                time_samples=(None if grid.get("time_samples") is None else int(grid["time_samples"])),
                space_samples=(None if grid.get("space_samples") is None else int(grid["space_samples"])),
            ),
            analysis=AnalysisParams(
                gain_threshold=float(ana.get("gain_threshold", 0.02)),
                amplitude_floor_rel=float(ana.get("amplitude_floor_rel", 0.02)),
                ridge_halfwidth_bins=int(ana.get("ridge_halfwidth_bins", 2)),
                blur_ratio_threshold=float(ana.get("blur_ratio_threshold", 1.5)),
                no_artifact_l2_rel=float(ana.get("no_artifact_l2_rel", 0.1)),
            ),
            backend=Backend(d.get("backend", "auto")),
            id=str(d.get("id", "")),
        )
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed config: {exc}") from exc
    return config.validate()


def default_config() -> RunConfig:
    return RunConfig().validate()


def default_stereo_config() -> RunConfig:
    return RunConfig(
        stimulus=StimulusParams(velocity_cm_per_s=10.0),
        display=DisplayParams(capture_rate_hz=60.0),
        stereo=StereoParams(),
        mode=RunMode.STEREO,
    ).validate()
