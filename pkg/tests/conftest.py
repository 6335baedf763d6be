import warnings

import pytest

from motionscope.params import (
    AnalysisParams,
    DisplayParams,
    GridSpec,
    RgbMode,
    RunConfig,
    RunMode,
    StereoParams,
    StereoTiming,
    StimulusParams,
    ViewingParams,
)


@pytest.fixture(autouse=True)
def _quiet_csf_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="retinal illuminance")
        warnings.filterwarnings("ignore", message="luminance")
        yield


def make_config(velocity=1.0, capture_hz=120.0, hold=0.5, width_cm=0.1, l_max=100.0,
                recording=0.5, tracking=False, rgb="BW", flashes=1, dpi=300.0,
                contrast=100.0, tau=0.0, fill=1.0, breakup_correction=False,
                distance=50.0, grid=None, analysis=None) -> RunConfig:
    return RunConfig(
        stimulus=StimulusParams(velocity_cm_per_s=velocity, width_cm=width_cm,
                                recording_length_s=recording, l_max=l_max),
        display=DisplayParams(flash_count=flashes, rgb_mode=RgbMode(rgb),
                              capture_rate_hz=capture_hz, hold_interval=hold,
                              pixel_response_s=tau, dpi=dpi, fill_factor=fill,
                              contrast=(contrast,) if isinstance(contrast, float) else tuple(contrast),
                              breakup_correction=breakup_correction),
        viewing=ViewingParams(distance_cm=distance, tracking=tracking),
        grid=grid or GridSpec(),
        analysis=analysis or AnalysisParams(),
    ).validate()


def make_stereo_config(velocity=10.0, capture_hz=60.0, flashes=1, recording=0.5,
                       capture="SIMULTANEOUS", presentation="ALTERNATING",
                       nominal=0.0, tracking=False, distance=50.0) -> RunConfig:
    return RunConfig(
        stimulus=StimulusParams(velocity_cm_per_s=velocity, recording_length_s=recording),
        display=DisplayParams(capture_rate_hz=capture_hz, flash_count=flashes),
        viewing=ViewingParams(distance_cm=distance, tracking=tracking),
        stereo=StereoParams(capture_mode=StereoTiming(capture),
                            presentation_mode=StereoTiming(presentation),
                            nominal_disparity_deg=nominal),
        mode=RunMode.STEREO,
    ).validate()
