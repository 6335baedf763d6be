// Configuration types mirroring the service's versioned JSON schema.

export type RgbMode = 'BW' | 'RGB_SEQ' | 'RGB_SIMUL';
export type RunMode = 'NON_STEREO' | 'STEREO';
export type StereoTiming = 'SIMULTANEOUS' | 'ALTERNATING';
export type EyeName = 'LEFT' | 'RIGHT';
export type BackendName = 'auto' | 'cpu' | 'accelerator';

export interface StimulusConfig {
  velocity_cm_per_s: number;
  width_cm: number;
  recording_length_s: number;
  l_max: number;
}

export interface DisplayConfig {
  flash_count: number;
  rgb_mode: RgbMode;
  capture_rate_hz: number;
  hold_interval: number;
  pixel_response_s: number;
  dpi: number;
  fill_factor: number;
  contrast: number | number[];
  breakup_correction: boolean;
}

export interface ViewingConfig {
  distance_cm: number;
  tracking: boolean;
}

export interface StereoConfig {
  capture_mode: StereoTiming;
  presentation_mode: StereoTiming;
  nominal_disparity_deg: number;
  first_eye: EyeName;
}

export interface GridConfig {
  spatial_samples_per_pixel: number;
  temporal_samples_per_frame: number;
  padding_factor: number;
  time_samples: number | null;
  space_samples: number | null;
}

export interface RunConfig {
  schema_version: number;
  id: string;
  mode: RunMode;
  backend: BackendName;
  stimulus: StimulusConfig;
  display: DisplayConfig;
  viewing: ViewingConfig;
  stereo?: StereoConfig | null;
  grid: GridConfig;
  analysis?: Record<string, number>;
}

export interface ArtifactReport {
  flicker: boolean;
  flicker_components: Array<[number, number]>;
  judder: boolean;
  visible_replicates: number;
  edge_banding: boolean;
  motion_blur: boolean;
  blur_ratio: number | null;
  color_breakup: boolean;
  centroid_separation_deg: number | null;
}

export type RunStatus = 'QUEUED' | 'RUNNING' | 'DONE' | 'FAILED';

export interface RunRecord {
  run_id: string;
  created_at: string;
  status: RunStatus;
  mode: RunMode;
  error: string | null;
  error_kind: string | null;
  metrics: Record<string, number>;
  panels: string[];
  config?: RunConfig;
}

export interface PanelMeta {
  kind: 'raster' | 'spectrum_magnitude' | 'difference';
  shape: number[];
  dtype: string;
  channels: string[];
  frame_of_reference?: 'DISPLAY' | 'RETINA';
  axes: Record<string, { origin: number; pitch: number; unit: string }>;
  units?: string;
}

export interface CompareEntry {
  run_id: string;
  l2_rel: number;
  max_abs: number;
  report: ArtifactReport | null;
}

export interface CompareBundle {
  compare_id: string;
  reference_id: string;
  entries: CompareEntry[];
}

export interface ApiError {
  error: string;
  message: string;
  field?: string;
}
