// Float-panel decoding and rasterization to RGBA pixels for canvas display.
// Panels arrive as little-endian float32 [channels x T x X] with a JSON
// sidecar describing axes; images are drawn position-vertical/time-horizontal
// for rasters and spatial-frequency-vertical/temporal-frequency-horizontal
// for spectra.

import type { PanelMeta } from './types';

export interface DecodedPanel {
  channels: number;
  rows: number; // time or temporal-frequency samples
  cols: number; // space or spatial-frequency samples
  data: Float32Array;
  meta: PanelMeta;
}

export function decodePanel(buffer: ArrayBuffer, meta: PanelMeta): DecodedPanel {
  const [channels, rows, cols] = meta.shape;
  const expected = channels * rows * cols;
  const data = new Float32Array(buffer);
  if (data.length !== expected) {
    throw new Error(`panel size mismatch: got ${data.length} floats, sidecar says ${expected}`);
  }
  return { channels, rows, cols, data, meta };
}

export function valueAt(panel: DecodedPanel, ch: number, row: number, col: number): number {
  return panel.data[(ch * panel.rows + row) * panel.cols + col];
}

/** Map a panel to RGBA pixels, image laid out [cols x rows] (space vertical).
 * Grayscale for single-channel, native RGB for three-channel panels;
 * `logScale` renders 20*log10(|v|/peak) clipped at `floorDb` (for spectra). */
export function panelToRgba(
  panel: DecodedPanel,
  logScale = false,
  floorDb = -60,
): { pixels: Uint8ClampedArray<ArrayBuffer>; width: number; height: number } {
  const { channels, rows, cols } = panel;
  const width = rows;
  const height = cols;
  const pixels = new Uint8ClampedArray(width * height * 4);

  let peak = 0;
  let lo = Infinity;
  for (const v of panel.data) {
    const a = logScale ? Math.abs(v) : v;
    if (a > peak) peak = a;
    if (v < lo) lo = v;
  }
  if (!Number.isFinite(lo)) lo = 0;
  const span = logScale ? -floorDb : peak - lo || 1;

  const norm = (v: number): number => {
    if (logScale) {
      const db = 20 * Math.log10(Math.max(Math.abs(v) / (peak || 1), 1e-12));
      return Math.min(Math.max((db - floorDb) / span, 0), 1);
    }
    return Math.min(Math.max((v - lo) / span, 0), 1);
  };

  for (let row = 0; row < rows; row++) {
    for (let col = 0; col < cols; col++) {
      // canvas y grows downward; put increasing position upward
      const px = ((height - 1 - col) * width + row) * 4;
      if (channels === 3) {
        for (let ch = 0; ch < 3; ch++) {
          pixels[px + ch] = Math.round(255 * norm(panel.data[(ch * rows + row) * cols + col]));
        }
      } else {
        const g = Math.round(255 * norm(panel.data[row * cols + col]));
        pixels[px] = g;
        pixels[px + 1] = g;
        pixels[px + 2] = g;
      }
      pixels[px + 3] = 255;
    }
  }
  return { pixels, width, height };
}

/** Signed difference panels: blue-white-red about 0. */
export function diffToRgba(panel: DecodedPanel): {
  pixels: Uint8ClampedArray<ArrayBuffer>;
  width: number;
  height: number;
} {
  const { rows, cols } = panel;
  const width = rows;
  const height = cols;
  let lim = 0;
  for (const v of panel.data) lim = Math.max(lim, Math.abs(v));
  if (lim === 0) lim = 1;
  const pixels = new Uint8ClampedArray(width * height * 4);
  for (let row = 0; row < rows; row++) {
    for (let col = 0; col < cols; col++) {
      const v = panel.data[row * cols + col] / lim; // [-1, 1]
      const px = ((height - 1 - col) * width + row) * 4;
      pixels[px] = Math.round(255 * (v >= 0 ? 1 : 1 + v)); // red holds for positive
      pixels[px + 1] = Math.round(255 * (1 - Math.abs(v)));
      pixels[px + 2] = Math.round(255 * (v <= 0 ? 1 : 1 - v)); // blue for negative
      pixels[px + 3] = 255;
    }
  }
  return { pixels, width, height };
}

export interface AxisLabels {
  x: string;
  y: string;
  xRange: [number, number];
  yRange: [number, number];
}

export function axisLabels(meta: PanelMeta): AxisLabels {
  const [, rows, cols] = meta.shape;
  if (meta.kind === 'spectrum_magnitude') {
    const w = meta.axes['w'];
    const u = meta.axes['u'];
    return {
      x: `temporal frequency (${w.unit})`,
      y: `spatial frequency (${u.unit})`,
      xRange: [w.origin, w.origin + w.pitch * (rows - 1)],
      yRange: [u.origin, u.origin + u.pitch * (cols - 1)],
    };
  }
  const t = meta.axes['t'];
  const x = meta.axes['x'];
  const yLabel =
    meta.frame_of_reference === 'RETINA' ? `retinal position (${x.unit})` : `position (${x.unit})`;
  return {
    x: `time (${t.unit})`,
    y: yLabel,
    xRange: [t.origin, t.origin + t.pitch * (rows - 1)],
    yRange: [x.origin, x.origin + x.pitch * (cols - 1)],
  };
}

export interface DisparityPoint {
  time: number;
  disparityArcmin: number;
  pairing: string;
}

/** Parse the disparity.csv artifact (time_s,disparity_deg,pairing). */
export function parseDisparityCsv(text: string): DisparityPoint[] {
  const lines = text.trim().split(/\r?\n/);
  const out: DisparityPoint[] = [];
  for (const line of lines.slice(1)) {
    const [t, d, pairing] = line.split(',');
    if (t === undefined || d === undefined) continue;
    out.push({ time: Number(t), disparityArcmin: Number(d) * 60, pairing: (pairing ?? '').trim() });
  }
  return out;
}
