"""Motion-artifact prediction for display design.

Synthesizes continuous and display-sampled moving stimuli, filters their
spectra through a luminance-dependent contrast-sensitivity model,
reconstructs the predicted percepts, classifies artifacts, and models depth
distortion on temporally interlaced stereo displays.
"""

from .csf import CsfModel, build_filter, combined_cs, luminance_to_trolands, spatial_cs, temporal_cs
from .errors import MotionscopeError, ResourceLimitError, ValidationError
from .params import (
    AnalysisParams,
    Backend,
    DisplayParams,
    Eye,
    GridSpec,
    RgbMode,
    RunConfig,
    RunMode,
    StereoParams,
    StereoTiming,
    StimulusParams,
    ViewingParams,
    background_luminance,
    cm_to_deg,
    config_from_dict,
    config_to_dict,
    default_config,
    default_stereo_config,
    mean_foveal_luminance,
    velocity_cm_to_deg,
)
from .pipeline import (
    ArtifactReport,
    ComparisonResult,
    RunResult,
    StereoRunResult,
    classify_artifacts,
    color_breakup_offsets,
    compare_runs,
    execute_run,
    run_prediction,
    run_stereo,
)
from .spectrum import Spectrum, analytic_sampled_spectrum, forward, inverse
from .stereo import (
    DisparitySeries,
    EyeEvent,
    disparity_error_closed_form,
    estimate_disparity,
    presentation_schedule,
    stereo_velocity_deg_per_s,
)
from .stimulus import (
    SpaceTimeRaster,
    SpatialKernel,
    TemporalProfile,
    build_grid,
    render_continuous,
    render_sampled,
    render_sampled_tracking,
    spatial_kernel,
    temporal_profile,
)

__version__ = "0.1.0"
