"""Luminance-dependent spatiotemporal contrast sensitivity and the visibility filter.

The model is separable: CS(u, w) = sqrt(CS_s(u) * CS_t(w)). The spatial factor
follows Barten's formula with object size and luminance; the temporal factor is
an empirical fit to flicker-sensitivity data tabulated against retinal
illuminance, so luminance in cd/m² is converted to trolands through Barten's
pupil-diameter model before evaluation.

Model card
----------
- temporal constants: a=2.1e9, b=9e-4, c=1.2e-7, d=-2.7e-4; the remaining
  exponent constant is fitted here as F_EXPONENT=5e-4 (chosen so the
  expression stays real over E in [2, 5000] Td and the peak sensitivity grows
  by ~4x from 0.5 to 160 cd/m²).
- the temporal expression is non-real below OMEGA_FLOOR_HZ ~ 2.1 Hz for every
  illuminance (sign change in the d-term denominator); sensitivity is held
  constant below the floor.
- peak sensitivity saturates above ~80 cd/m² (~600 Td) and rolls off slightly;
  this is a property of the printed constants.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

# temporal-model constants
CS_T_A = 2.1e9
CS_T_B = 9e-4
CS_T_C = 1.2e-7
CS_T_D = -2.7e-4
F_EXPONENT = 5e-4

# the d-term denominator 1.007 - exp(F*w^3.8) changes sign at this frequency;
# below it the expression under the root is negative for every illuminance
OMEGA_STAR_HZ = (math.log(1.007) / F_EXPONENT) ** (1 / 3.8)
OMEGA_FLOOR_HZ = 1.05 * OMEGA_STAR_HZ

# fitted retinal-illuminance range (Td); clamped with a warning outside
TROLAND_RANGE = (2.0, 5000.0)

DEFAULT_OBJECT_SIZE_DEG = 5.0  # foveal diameter; see README model card

# Sustained-pathway floor used by the visibility filter. The flicker fit above
# has no response at low temporal frequency (it models modulation thresholds),
# but static contrast is seen through the sustained channel at a fraction of
# peak flicker sensitivity that shrinks with illuminance: near-unity in the
# mesopic range (low-pass regime), ~1/3 in the bright photopic (band-pass).
SUSTAINED_KNEE_TD = 10.0
SUSTAINED_EXPONENT = 0.25
SUSTAINED_CORNER_HZ = 10.0


def sustained_fraction(e_td: float) -> float:
    return min(1.0, (SUSTAINED_KNEE_TD / max(e_td, 1e-6)) ** SUSTAINED_EXPONENT)


def luminance_to_trolands(l_cdm2: float) -> float:
    """Retinal illuminance E = L * pupil area, pupil d = 5 - 3 tanh(0.4 log10 L) mm."""
    if l_cdm2 <= 0:
        raise ValidationError("luminance must be positive for troland conversion")
    d_mm = 5 - 3 * math.tanh(0.4 * math.log10(l_cdm2))
    return l_cdm2 * math.pi * d_mm**2 / 4


def spatial_cs(u, l_cdm2: float, object_size_deg: float = DEFAULT_OBJECT_SIZE_DEG):
    """Spatial contrast sensitivity at spatial frequency ``u`` (cpd).

    Accepts scalars or arrays for ``u``; u must be positive (the expression
    vanishes as u -> 0).
    """
    if l_cdm2 <= 0:
        raise ValidationError("luminance must be positive")
    if object_size_deg <= 0:
        raise ValidationError("object size must be positive")
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise ValidationError("spatial frequency must be positive")
    num = 5200 * np.exp(-0.0016 * u**2 * (1 + 100.0 / l_cdm2) ** 0.08)
    den = np.sqrt(
        (1 + 144.0 / object_size_deg**2 + 0.64 * u**2)
        * (63.0 / l_cdm2**0.83 + 1.0 / (1 - np.exp(-0.02 * u**2)))
    )
    out = num / den
    return float(out) if out.ndim == 0 else out


def _clamped_trolands(l_cdm2: float) -> float:
    e_td = luminance_to_trolands(l_cdm2)
    lo, hi = TROLAND_RANGE
    if not lo <= e_td <= hi:
        warnings.warn(
            f"retinal illuminance {e_td:.3g} Td outside fitted range [{lo:g}, {hi:g}]; clamping",
            stacklevel=3,
        )
        e_td = min(max(e_td, lo), hi)
    return e_td


def temporal_cs(w, l_cdm2: float):
    """Temporal contrast sensitivity at temporal frequency ``w`` (Hz).

    ``l_cdm2`` is luminance in cd/m²; it is converted to trolands internally.
    Frequencies below OMEGA_FLOOR_HZ evaluate at the floor (see module card).
    """
    if l_cdm2 <= 0:
        raise ValidationError("luminance must be positive")
    w_in = np.asarray(w, dtype=float)
    if np.any(w_in <= 0):
        raise ValidationError("temporal frequency must be positive")
    e_td = _clamped_trolands(l_cdm2)
    w_eval = np.maximum(w_in, OMEGA_FLOOR_HZ)

    num = 5360 * e_td**2.51 * np.exp(-0.16 * w_eval ** (e_td**-0.017))
    arg = F_EXPONENT * w_eval**3.8
    # exp overflows for large w; the d-term limit is 0 there
    dterm = CS_T_D / (1.007 - np.exp(np.minimum(arg, 700.0)))
    under = (CS_T_A * w_eval ** (CS_T_B * e_td) * e_td**4.98 + 1) * (CS_T_C / e_td + dterm) - e_td**5
    if np.any(under <= 0):
        raise ValidationError(
            "temporal sensitivity undefined: expression under the square root "
            f"is non-positive at w={w_eval[under <= 0] if w_eval.ndim else w_eval} Hz, E={e_td:.3g} Td"
        )
    out = num / np.sqrt(under)
    if np.any(~np.isfinite(out)):
        raise ValidationError("temporal sensitivity produced a non-finite value (numerator overflow)")
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CsfModel:
    """Sensitivity surface conditioned on one mean luminance."""

    luminance_cdm2: float
    object_size_deg: float = DEFAULT_OBJECT_SIZE_DEG
    _peak: float = field(init=False, default=0.0, repr=False)

    def __post_init__(self):
        if self.luminance_cdm2 <= 0:
            raise ValidationError("luminance must be positive")
        if not 0.1 <= self.luminance_cdm2 <= 1000.0:
            warnings.warn(
                f"luminance {self.luminance_cdm2:.3g} cd/m² outside supported [0.1, 1000]",
                stacklevel=2,
            )
        object.__setattr__(self, "_peak", self._compute_peak())

    def spatial(self, u):
        return spatial_cs(u, self.luminance_cdm2, self.object_size_deg)

    def temporal(self, w):
        return temporal_cs(w, self.luminance_cdm2)

    def combined(self, u, w):
        """CS(u, w) = sqrt(CS_s(u) * CS_t(w)); u, w broadcast."""
        return np.sqrt(np.asarray(self.spatial(u)) * np.asarray(self.temporal(w)))

    def temporal_peak(self) -> float:
        w = np.linspace(OMEGA_FLOOR_HZ, 90.0, 600)
        return float(np.max(self.temporal(w)))

    def sustained_level(self) -> float:
        """Zero-frequency sensitivity of the sustained channel."""
        return sustained_fraction(_clamped_trolands(self.luminance_cdm2)) * self.temporal_peak()

    def temporal_effective(self, w):
        """Temporal sensitivity of the filter surface: flicker fit or the
        low-pass sustained channel, whichever responds more."""
        w = np.asarray(w, dtype=float)
        transient = self.temporal(w)
        sustained = self.sustained_level() * np.exp(-((w / SUSTAINED_CORNER_HZ) ** 2))
        out = np.maximum(transient, sustained)
        return float(out) if out.ndim == 0 else out

    def combined_effective(self, u, w):
        return np.sqrt(np.asarray(self.spatial(u)) * np.asarray(self.temporal_effective(w)))

    def _compute_peak(self) -> float:
        u = np.linspace(0.1, 60.0, 600)
        w = np.linspace(OMEGA_FLOOR_HZ, 90.0, 600)
        return float(np.sqrt(self.spatial(u).max() * self.temporal_effective(w).max()))

    @property
    def peak(self) -> float:
        return self._peak

    def threshold_contrast(self, u, w):
        """Contrast at threshold: 1/CS."""
        return 1.0 / self.combined(u, w)

    def cutoff_temporal_hz(self, cs_level: float = 1.0) -> float:
        """Highest frequency where CS_t still reaches ``cs_level``."""
        w = np.linspace(OMEGA_FLOOR_HZ, 90.0, 2000)
        v = self.temporal(w)
        above = np.nonzero(v >= cs_level)[0]
        return float(w[above[-1]]) if len(above) else float("nan")


def combined_cs(u, w, model: CsfModel):
    return model.combined(u, w)


def build_filter(u_axis: np.ndarray, w_axis: np.ndarray, model: CsfModel,
                 stimulus_contrast: float) -> np.ndarray:
    """Non-binary window-of-visibility gain grid over (w, u) axes.

    A bin passes when the stimulus contrast exceeds threshold there
    (contrast * CS >= 1), with graded gain CS/CS_peak; the DC bin passes
    unchanged (mean luminance is not an artifact). Axis values are evaluated
    at |.| floored to half a bin to stay off the u=0 / w=0 singularities.
    """
    if stimulus_contrast <= 0:
        raise ValidationError("stimulus contrast must be positive")
    du = abs(u_axis[1] - u_axis[0])
    dw = abs(w_axis[1] - w_axis[0])
    u_eval = np.maximum(np.abs(u_axis), du / 2)
    w_eval = np.maximum(np.abs(w_axis), dw / 2)
    cs = np.sqrt(np.outer(model.temporal_effective(w_eval), model.spatial(u_eval)))
    gain = np.minimum(cs / model.peak, 1.0)
    gain[stimulus_contrast * cs < 1.0] = 0.0
    dc_r = int(np.argmin(np.abs(w_axis)))
    dc_c = int(np.argmin(np.abs(u_axis)))
    gain[dc_r, dc_c] = 1.0
    return gain
