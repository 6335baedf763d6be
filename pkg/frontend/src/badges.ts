// Artifact-report presentation helpers.

import type { ArtifactReport } from './types';

export interface Badge {
  key: string;
  label: string;
  active: boolean;
  detail: string;
}

export function reportBadges(report: ArtifactReport): Badge[] {
  return [
    {
      key: 'flicker',
      label: 'Flicker',
      active: report.flicker,
      detail: report.flicker
        ? `components at ${report.flicker_components.map(([, w]) => `${w.toFixed(0)} Hz`).join(', ')}`
        : 'no replicate energy on the temporal-frequency axis',
    },
    {
      key: 'judder',
      label: 'Judder',
      active: report.judder,
      detail: `${report.visible_replicates} visible replicate${report.visible_replicates === 1 ? '' : 's'}`,
    },
    {
      key: 'edge_banding',
      label: 'Edge banding',
      active: report.edge_banding,
      detail: report.edge_banding ? 'judder under a multi-flash protocol' : '',
    },
    {
      key: 'motion_blur',
      label: 'Motion blur',
      active: report.motion_blur,
      detail: report.blur_ratio != null ? `blur ratio ${report.blur_ratio.toFixed(2)}` : 'requires tracking',
    },
    {
      key: 'color_breakup',
      label: 'Color breakup',
      active: report.color_breakup,
      detail:
        report.centroid_separation_deg != null
          ? `channel separation ${(report.centroid_separation_deg * 60).toFixed(2)} arcmin`
          : 'color-sequential mode only',
    },
  ];
}

export function allClear(report: ArtifactReport): boolean {
  return reportBadges(report).every((b) => !b.active);
}
