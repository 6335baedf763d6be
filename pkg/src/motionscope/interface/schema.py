"""Versioned JSON schema for run configurations.

Structural problems (types, enums, unknown fields) raise SchemaError; the
dataclass layer then enforces semantic invariants (inequalities, mode/stereo
coupling) and raises ValidationError with a field path.
"""

from __future__ import annotations

from typing import Any

import jsonschema

from ..errors import MotionscopeError
from ..params import RunConfig, config_from_dict


class SchemaError(MotionscopeError):
    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.path = path


_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

CONFIG_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "schema_version": {"type": "integer", "minimum": 1, "maximum": 1},
        "id": {"type": "string"},
        "mode": {"enum": ["NON_STEREO", "STEREO"]},
        "backend": {"enum": ["auto", "cpu", "accelerator"]},
        "stimulus": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "velocity_cm_per_s": _NUMBER,
                "width_cm": _POSITIVE,
                "recording_length_s": _POSITIVE,
                "l_max": _POSITIVE,
            },
        },
        "display": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "flash_count": {"type": "integer", "minimum": 1},
                "rgb_mode": {"enum": ["BW", "RGB_SEQ", "RGB_SIMUL"]},
                "capture_rate_hz": _POSITIVE,
                "hold_interval": {"type": "number", "minimum": 0, "maximum": 1},
                "pixel_response_s": {"type": "number", "minimum": 0},
                "dpi": _POSITIVE,
                "fill_factor": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "contrast": {
                    "anyOf": [
                        _POSITIVE,
                        {"type": "array", "items": _POSITIVE, "minItems": 1, "maxItems": 3},
                    ]
                },
                "breakup_correction": {"type": "boolean"},
            },
        },
        "viewing": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "distance_cm": _POSITIVE,
                "tracking": {"type": "boolean"},
            },
        },
        "stereo": {
            "type": ["object", "null"],
            "additionalProperties": False,
            "properties": {
                "capture_mode": {"enum": ["SIMULTANEOUS", "ALTERNATING"]},
                "presentation_mode": {"enum": ["SIMULTANEOUS", "ALTERNATING"]},
                "nominal_disparity_deg": _NUMBER,
                "first_eye": {"enum": ["LEFT", "RIGHT"]},
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "spatial_samples_per_pixel": {"type": "integer", "minimum": 2},
                "temporal_samples_per_frame": {"type": "integer", "minimum": 4},
                "padding_factor": {"type": "number", "minimum": 1},
                "time_samples": {"type": ["integer", "null"], "minimum": 8},
                "space_samples": {"type": ["integer", "null"], "minimum": 8},
            },
        },
        "analysis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "gain_threshold": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "amplitude_floor_rel": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "ridge_halfwidth_bins": {"type": "integer", "minimum": 1},
                "blur_ratio_threshold": {"type": "number", "exclusiveMinimum": 1},
                "no_artifact_l2_rel": _POSITIVE,
            },
        },
    },
}


def validate_payload(payload: Any) -> None:
    """Structural validation against the versioned schema."""
    try:
        jsonschema.validate(payload, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path)
        raise SchemaError(exc.message, path=path) from exc


def parse_config(payload: Any) -> RunConfig:
    """Schema check plus semantic validation; returns a validated RunConfig."""
    validate_payload(payload)
    return config_from_dict(payload)
