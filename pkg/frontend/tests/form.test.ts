import { describe, expect, it } from 'vitest';

import { FORM_PANELS, ParameterFormModel, cmToDeg, getPath } from '../src/form';
import type { RunConfig } from '../src/types';

const DEFAULTS: RunConfig = {
  schema_version: 1,
  id: '',
  mode: 'NON_STEREO',
  backend: 'auto',
  stimulus: { velocity_cm_per_s: 1, width_cm: 0.1, recording_length_s: 0.5, l_max: 100 },
  display: {
    flash_count: 1,
    rgb_mode: 'BW',
    capture_rate_hz: 120,
    hold_interval: 0.5,
    pixel_response_s: 0,
    dpi: 300,
    fill_factor: 1,
    contrast: 100,
    breakup_correction: false,
  },
  viewing: { distance_cm: 50, tracking: false },
  stereo: null,
  grid: {
    spatial_samples_per_pixel: 4,
    temporal_samples_per_frame: 16,
    padding_factor: 1,
    time_samples: null,
    space_samples: null,
  },
};

describe('ParameterFormModel', () => {
  it('round-trips values through form and config', () => {
    const model = new ParameterFormModel(DEFAULTS);
    const config = model.toConfig();
    for (const panel of FORM_PANELS) {
      for (const field of panel.fields) {
        if (field.stereoOnly || field.key === 'mode' || field.key === 'backend') continue;
        expect(getPath(config, field.key)).toEqual(getPath(DEFAULTS, field.key));
      }
    }
    expect(config.stereo).toBeNull();
    expect(config.mode).toBe('NON_STEREO');
  });

  it('edits flow into the produced config', () => {
    const model = new ParameterFormModel(DEFAULTS);
    model.set('display.capture_rate_hz', '60');
    model.set('stimulus.velocity_cm_per_s', '10');
    const config = model.toConfig();
    expect(config.display.capture_rate_hz).toBe(60);
    expect(config.stimulus.velocity_cm_per_s).toBe(10);
  });

  it('includes the stereo block only in stereo mode', () => {
    const model = new ParameterFormModel(DEFAULTS);
    model.set('mode', 'STEREO');
    const config = model.toConfig();
    expect(config.stereo).toMatchObject({
      capture_mode: 'SIMULTANEOUS',
      presentation_mode: 'ALTERNATING',
    });
    model.set('mode', 'NON_STEREO');
    expect(model.toConfig().stereo).toBeNull();
  });

  it('mirrors server range validation', () => {
    const model = new ParameterFormModel(DEFAULTS);
    model.set('display.hold_interval', '1.4');
    model.set('display.fill_factor', '0');
    model.set('stimulus.width_cm', '-1');
    const errors = model.validate();
    expect(errors['display.hold_interval']).toMatch(/<= 1/);
    expect(errors['display.fill_factor']).toMatch(/> 0/);
    expect(errors['stimulus.width_cm']).toMatch(/> 0/);
  });

  it('mirrors the trapezoid-fit inequality', () => {
    const model = new ParameterFormModel(DEFAULTS);
    model.set('display.pixel_response_s', '0.01'); // hold 0.5 at 120 Hz allows ~1.04 ms
    const errors = model.validate();
    expect(errors['display.pixel_response_s']).toMatch(/pixel_response <= hold/);
    model.set('display.pixel_response_s', '0.0005');
    expect(model.validate()).toEqual({});
  });

  it('skips stereo validation outside stereo mode', () => {
    const model = new ParameterFormModel(DEFAULTS);
    model.set('stereo.nominal_disparity_deg', 'not-a-number');
    expect(model.validate()).toEqual({});
    model.set('mode', 'STEREO');
    expect(model.validate()['stereo.nominal_disparity_deg']).toBe('required number');
  });

  it('integer fields reject fractions', () => {
    const model = new ParameterFormModel(DEFAULTS);
    model.set('display.flash_count', '1.5');
    expect(model.validate()['display.flash_count']).toMatch(/integer/);
  });
});

describe('cmToDeg display hint', () => {
  it('matches the full-angle caption values', () => {
    expect(cmToDeg(1, 50)).toBeCloseTo(1.1458, 3);
    expect(cmToDeg(20, 50)).toBeCloseTo(22.6199, 3);
  });
});
