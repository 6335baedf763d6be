// Parameter form model: field groups mirroring the service schema, with
// client-side validation that matches the server's semantic rules so most
// mistakes are caught before submission.

import type { RunConfig, RunMode } from './types';

export interface FieldSpec {
  key: string; // dotted path in the config
  label: string;
  kind: 'number' | 'integer' | 'boolean' | 'select';
  unit?: string;
  options?: string[];
  min?: number;
  max?: number;
  exclusiveMin?: boolean;
  step?: number;
  stereoOnly?: boolean;
}

export interface PanelSpec {
  title: string;
  fields: FieldSpec[];
}

export const FORM_PANELS: PanelSpec[] = [
  {
    title: 'Setup',
    fields: [
      { key: 'mode', label: 'Run type', kind: 'select', options: ['NON_STEREO', 'STEREO'] },
      { key: 'backend', label: 'Compute backend', kind: 'select', options: ['auto', 'cpu', 'accelerator'] },
    ],
  },
  {
    title: 'Stimulus',
    fields: [
      { key: 'stimulus.velocity_cm_per_s', label: 'Velocity', kind: 'number', unit: 'cm/s' },
      { key: 'stimulus.width_cm', label: 'Stimulus size', kind: 'number', unit: 'cm', min: 0, exclusiveMin: true },
      { key: 'stimulus.recording_length_s', label: 'Recording length', kind: 'number', unit: 's', min: 0, exclusiveMin: true },
      { key: 'stimulus.l_max', label: 'Luminance L_max', kind: 'number', unit: 'cd/m²', min: 0, exclusiveMin: true },
    ],
  },
  {
    title: 'Display',
    fields: [
      { key: 'display.flash_count', label: 'Number of flashes', kind: 'integer', min: 1 },
      { key: 'display.rgb_mode', label: 'RGB mode', kind: 'select', options: ['BW', 'RGB_SEQ', 'RGB_SIMUL'] },
      { key: 'display.capture_rate_hz', label: 'Capture rate', kind: 'number', unit: 'Hz', min: 0, exclusiveMin: true },
      { key: 'display.hold_interval', label: 'Hold interval', kind: 'number', min: 0, max: 1, step: 0.05 },
      { key: 'display.pixel_response_s', label: 'Pixel response', kind: 'number', unit: 's', min: 0 },
      { key: 'display.dpi', label: 'DPI', kind: 'number', min: 0, exclusiveMin: true },
      { key: 'display.fill_factor', label: 'Fill factor', kind: 'number', min: 0, max: 1, exclusiveMin: true, step: 0.05 },
      { key: 'display.contrast', label: 'Weber contrast', kind: 'number', min: 0, exclusiveMin: true },
      { key: 'display.breakup_correction', label: 'Color-breakup offsets', kind: 'boolean' },
    ],
  },
  {
    title: 'Viewing',
    fields: [
      { key: 'viewing.distance_cm', label: 'Viewing distance', kind: 'number', unit: 'cm', min: 0, exclusiveMin: true },
      { key: 'viewing.tracking', label: 'Object tracking', kind: 'boolean' },
    ],
  },
  {
    title: 'Stereo',
    fields: [
      { key: 'stereo.capture_mode', label: 'Capture mode', kind: 'select', options: ['SIMULTANEOUS', 'ALTERNATING'], stereoOnly: true },
      { key: 'stereo.presentation_mode', label: 'Presentation mode', kind: 'select', options: ['SIMULTANEOUS', 'ALTERNATING'], stereoOnly: true },
      { key: 'stereo.nominal_disparity_deg', label: 'Nominal disparity', kind: 'number', unit: 'deg', stereoOnly: true },
      { key: 'stereo.first_eye', label: 'First eye in frame', kind: 'select', options: ['LEFT', 'RIGHT'], stereoOnly: true },
    ],
  },
];

export function getPath(obj: unknown, path: string): unknown {
  let cur: any = obj;
  for (const part of path.split('.')) {
    if (cur == null) return undefined;
    cur = cur[part];
  }
  return cur;
}

export function setPath(obj: Record<string, any>, path: string, value: unknown): void {
  const parts = path.split('.');
  let cur: any = obj;
  for (const part of parts.slice(0, -1)) {
    if (cur[part] == null) cur[part] = {};
    cur = cur[part];
  }
  cur[parts[parts.length - 1]] = value;
}

const DEFAULT_STEREO = {
  capture_mode: 'SIMULTANEOUS',
  presentation_mode: 'ALTERNATING',
  nominal_disparity_deg: 0,
  first_eye: 'LEFT',
} as const;

export class ParameterFormModel {
  values: Record<string, unknown> = {};
  mode: RunMode = 'NON_STEREO';

  constructor(defaults: RunConfig) {
    this.fromConfig(defaults);
  }

  fromConfig(config: RunConfig): void {
    this.mode = config.mode;
    this.values = {};
    const source: Record<string, any> = { ...config, stereo: config.stereo ?? DEFAULT_STEREO };
    for (const panel of FORM_PANELS) {
      for (const field of panel.fields) {
        const v = getPath(source, field.key);
        this.values[field.key] = v === undefined ? null : v;
      }
    }
    this.values['mode'] = config.mode;
  }

  set(key: string, value: unknown): void {
    this.values[key] = value;
    if (key === 'mode') this.mode = value as RunMode;
  }

  get(key: string): unknown {
    return this.values[key];
  }

  /** Field-level validation mirroring the server's schema and semantics. */
  validate(): Record<string, string> {
    const errors: Record<string, string> = {};
    for (const panel of FORM_PANELS) {
      for (const field of panel.fields) {
        if (field.stereoOnly && this.mode !== 'STEREO') continue;
        const value = this.values[field.key];
        if (field.kind === 'boolean' || field.kind === 'select') continue;
        const num = Number(value);
        if (value === null || value === '' || Number.isNaN(num)) {
          errors[field.key] = 'required number';
          continue;
        }
        if (field.kind === 'integer' && !Number.isInteger(num)) {
          errors[field.key] = 'must be an integer';
          continue;
        }
        if (field.min !== undefined) {
          if (field.exclusiveMin ? num <= field.min : num < field.min) {
            errors[field.key] = `must be ${field.exclusiveMin ? '>' : '>='} ${field.min}`;
            continue;
          }
        }
        if (field.max !== undefined && num > field.max) {
          errors[field.key] = `must be <= ${field.max}`;
        }
      }
    }
    // trapezoid fit: pixel response must fit inside half the illuminated slot
    const hold = Number(this.values['display.hold_interval']);
    const capture = Number(this.values['display.capture_rate_hz']);
    const flashes = Number(this.values['display.flash_count']);
    const tau = Number(this.values['display.pixel_response_s']);
    const rgbMode = this.values['display.rgb_mode'];
    if (!errors['display.pixel_response_s'] && tau > 0 && capture > 0 && flashes >= 1) {
      const slot = 1 / capture / flashes / (rgbMode === 'RGB_SEQ' ? 3 : 1);
      if (tau > (hold * slot) / 2) {
        errors['display.pixel_response_s'] =
          `must satisfy pixel_response <= hold * slot / 2 = ${((hold * slot) / 2).toExponential(3)}`;
      }
    }
    return errors;
  }

  toConfig(): RunConfig {
    const out: Record<string, any> = {
      schema_version: 1,
      id: '',
      mode: this.mode,
      backend: this.values['backend'] ?? 'auto',
      stimulus: {},
      display: {},
      viewing: {},
      grid: {
        spatial_samples_per_pixel: 4,
        temporal_samples_per_frame: 16,
        padding_factor: 1.0,
        time_samples: null,
        space_samples: null,
      },
    };
    for (const panel of FORM_PANELS) {
      for (const field of panel.fields) {
        if (field.key === 'mode' || field.key === 'backend') continue;
        if (field.stereoOnly && this.mode !== 'STEREO') continue;
        let value = this.values[field.key];
        if (field.kind === 'number') value = Number(value);
        if (field.kind === 'integer') value = Math.round(Number(value));
        setPath(out, field.key, value);
      }
    }
    if (this.mode !== 'STEREO') out.stereo = null;
    return out as RunConfig;
  }
}

/** Angular conversions shown next to the native-unit inputs. The displayed
 * values are cosmetic; the engine repeats the conversion server-side. */
export function cmToDeg(lengthCm: number, distanceCm: number): number {
  return (2 * Math.atan(lengthCm / (2 * distanceCm)) * 180) / Math.PI;
}
