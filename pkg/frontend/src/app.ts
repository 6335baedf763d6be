// DOM wiring: parameter form, run submission with polling, side-by-side
// panel viewer, artifact badges, and compare mode. Everything numeric shown
// here comes from service responses.

import { ApiClient, ApiRequestError, pollRun } from './api';
import { reportBadges } from './badges';
import { FORM_PANELS, ParameterFormModel, cmToDeg } from './form';
import {
  axisLabels,
  decodePanel,
  diffToRgba,
  panelToRgba,
  parseDisparityCsv,
} from './heatmap';
import type { ArtifactReport, RunRecord } from './types';

const PANEL_LAYOUT = [
  ['continuous_stimulus', 'continuous_input_spectrum', 'continuous_filtered_spectrum', 'continuous_reconstruction'],
  ['sampled_stimulus', 'sampled_input_spectrum', 'sampled_filtered_spectrum', 'sampled_reconstruction'],
];

const CONVERTED_HINTS: Record<string, (model: ParameterFormModel) => string> = {
  'stimulus.velocity_cm_per_s': (m) => {
    const d = Number(m.get('viewing.distance_cm'));
    const v = Number(m.get('stimulus.velocity_cm_per_s'));
    return d > 0 ? `${cmToDeg(v, d).toFixed(2)} deg/s` : '';
  },
  'stimulus.width_cm': (m) => {
    const d = Number(m.get('viewing.distance_cm'));
    const w = Number(m.get('stimulus.width_cm'));
    return d > 0 ? `${cmToDeg(w, d).toFixed(3)} deg` : '';
  },
};

class App {
  private client = new ApiClient('');
  private model!: ParameterFormModel;
  private errorsEl!: HTMLElement;
  private resultsEl!: HTMLElement;
  private runsEl!: HTMLElement;
  private compareMaster: string | null = null;

  async start(root: HTMLElement): Promise<void> {
    const defaults = await this.client.defaults();
    this.model = new ParameterFormModel(defaults);

    root.innerHTML = `
      <header><h1>motionscope</h1>
      <p class="tagline">perceived motion artifacts for display designs</p></header>
      <main>
        <section id="form-panels" class="panels"></section>
        <div class="actions">
          <button id="submit">Run prediction</button>
          <label class="compare-toggle"><input type="checkbox" id="compare-mode"> Compare mode</label>
          <span id="busy" hidden>running…</span>
        </div>
        <div id="errors" class="errors"></div>
        <section id="results"></section>
        <section id="runs"><h2>Runs</h2><div id="run-list"></div></section>
      </main>`;
    this.errorsEl = root.querySelector('#errors')!;
    this.resultsEl = root.querySelector('#results')!;
    this.runsEl = root.querySelector('#run-list')!;
    this.renderForm(root.querySelector('#form-panels')!);
    root.querySelector('#submit')!.addEventListener('click', () => void this.submit());
    await this.refreshRuns();
  }

  private renderForm(container: HTMLElement): void {
    container.innerHTML = '';
    for (const panel of FORM_PANELS) {
      const box = document.createElement('fieldset');
      box.className = 'panel';
      const isStereoPanel = panel.fields.some((f) => f.stereoOnly);
      if (isStereoPanel) box.classList.toggle('disabled', this.model.mode !== 'STEREO');
      box.innerHTML = `<legend>${panel.title}</legend>`;
      for (const field of panel.fields) {
        const row = document.createElement('label');
        row.className = 'field';
        row.dataset.key = field.key;
        const value = this.model.get(field.key);
        let input: string;
        if (field.kind === 'select') {
          const opts = (field.options ?? [])
            .map((o) => `<option value="${o}" ${o === value ? 'selected' : ''}>${o}</option>`)
            .join('');
          input = `<select data-key="${field.key}">${opts}</select>`;
        } else if (field.kind === 'boolean') {
          input = `<input type="checkbox" data-key="${field.key}" ${value ? 'checked' : ''}>`;
        } else {
          input = `<input type="number" data-key="${field.key}" value="${value}" step="${field.step ?? 'any'}">`;
        }
        const unit = field.unit ? `<span class="unit">${field.unit}</span>` : '';
        row.innerHTML = `<span>${field.label}</span>${input}${unit}<span class="hint" data-hint="${field.key}"></span><span class="field-error" data-error="${field.key}"></span>`;
        box.appendChild(row);
      }
      container.appendChild(box);
    }
    container.querySelectorAll('input,select').forEach((el) => {
      el.addEventListener('change', () => {
        const key = (el as HTMLElement).dataset.key!;
        const value =
          el instanceof HTMLInputElement && el.type === 'checkbox' ? el.checked : (el as HTMLInputElement).value;
        this.model.set(key, value);
        if (key === 'mode') this.renderForm(container);
        this.updateHints(container);
      });
    });
    this.updateHints(container);
  }

  private updateHints(container: HTMLElement): void {
    for (const [key, fn] of Object.entries(CONVERTED_HINTS)) {
      const el = container.querySelector(`[data-hint="${key}"]`);
      if (el) el.textContent = fn(this.model);
    }
  }

  private showFieldErrors(errors: Record<string, string>): void {
    document.querySelectorAll('.field-error').forEach((el) => (el.textContent = ''));
    for (const [key, message] of Object.entries(errors)) {
      const el = document.querySelector(`[data-error="${key}"]`);
      if (el) el.textContent = message;
    }
  }

  private async submit(): Promise<void> {
    this.errorsEl.textContent = '';
    const errors = this.model.validate();
    this.showFieldErrors(errors);
    if (Object.keys(errors).length) return;
    const busy = document.querySelector('#busy') as HTMLElement;
    busy.hidden = false;
    try {
      const runId = await this.client.submitRun(this.model.toConfig());
      const record = await pollRun(this.client, runId);
      if (record.status === 'FAILED') {
        this.errorsEl.textContent = `run failed: ${record.error}`;
      } else if (record.mode === 'STEREO') {
        await this.renderStereoResult(record);
      } else {
        await this.renderRunResult(record);
      }
      await this.refreshRuns();
      const compareMode = (document.querySelector('#compare-mode') as HTMLInputElement).checked;
      if (compareMode && record.status === 'DONE' && record.mode === 'NON_STEREO') {
        await this.renderComparison(record.run_id);
      }
    } catch (err) {
      if (err instanceof ApiRequestError && err.field) {
        this.showFieldErrors({ [err.field]: err.message });
      } else {
        this.errorsEl.textContent = String(err);
      }
    } finally {
      busy.hidden = true;
    }
  }

  private async renderRunResult(record: RunRecord): Promise<void> {
    this.resultsEl.innerHTML = `<h2>Run ${record.run_id}</h2>
      <div class="badges" id="badges"></div>
      <div class="panel-grid" id="panel-grid"></div>
      <pre class="metrics">${JSON.stringify(record.metrics, null, 2)}</pre>`;
    const report = await this.fetchReport(record.run_id);
    if (report) this.renderBadges(report);
    const grid = this.resultsEl.querySelector('#panel-grid')!;
    for (const row of PANEL_LAYOUT) {
      for (const name of row) {
        const cell = document.createElement('figure');
        cell.innerHTML = `<canvas></canvas><figcaption>${name.replaceAll('_', ' ')}</figcaption>`;
        grid.appendChild(cell);
        await this.drawPanel(record.run_id, name, cell.querySelector('canvas')!);
      }
    }
  }

  private async fetchReport(runId: string): Promise<ArtifactReport | null> {
    try {
      const text = await this.client.artifactText(runId, 'report.json');
      return JSON.parse(text) as ArtifactReport;
    } catch {
      return null;
    }
  }

  private renderBadges(report: ArtifactReport): void {
    const holder = this.resultsEl.querySelector('#badges')!;
    holder.innerHTML = reportBadges(report)
      .map(
        (b) =>
          `<span class="badge ${b.active ? 'active' : 'clear'}" title="${b.detail}">${b.label}</span>`,
      )
      .join('');
  }

  private async drawPanel(runId: string, name: string, canvas: HTMLCanvasElement): Promise<void> {
    const meta = await this.client.panelSidecar(runId, name);
    const data = await this.client.panelData(runId, name);
    const panel = decodePanel(data, meta);
    const logScale = meta.kind === 'spectrum_magnitude';
    const { pixels, width, height } = panelToRgba(panel, logScale);
    canvas.width = width;
    canvas.height = height;
    canvas.getContext('2d')!.putImageData(new ImageData(pixels, width, height), 0, 0);
    const labels = axisLabels(meta);
    canvas.title = `${labels.x} × ${labels.y}`;
  }

  private async renderStereoResult(record: RunRecord): Promise<void> {
    this.resultsEl.innerHTML = `<h2>Stereo run ${record.run_id}</h2>
      <div class="stereo-metrics">
        <div class="metric"><b>${(record.metrics['error_arcmin'] ?? 0).toFixed(3)}'</b><span>disparity error</span></div>
        <div class="metric"><b>${(record.metrics['closed_form_error_arcmin'] ?? 0).toFixed(3)}'</b><span>closed form</span></div>
        <div class="metric"><b>${(record.metrics['velocity_deg_per_s'] ?? 0).toFixed(2)}°/s</b><span>angular speed</span></div>
      </div>
      <canvas id="disparity-plot" width="720" height="300"></canvas>`;
    const csv = await this.client.artifactText(record.run_id, 'disparity.csv');
    const points = parseDisparityCsv(csv);
    this.drawDisparity(
      this.resultsEl.querySelector('#disparity-plot')!,
      points,
      (record.metrics['estimate_deg'] ?? 0) * 60,
    );
  }

  private drawDisparity(canvas: HTMLCanvasElement, points: { time: number; disparityArcmin: number }[], estimateArcmin: number): void {
    const ctx = canvas.getContext('2d')!;
    const { width, height } = canvas;
    ctx.fillStyle = '#fff';
    ctx.fillRect(0, 0, width, height);
    if (!points.length) return;
    const ts = points.map((p) => p.time);
    const ds = points.map((p) => p.disparityArcmin).concat([estimateArcmin, 0]);
    const [t0, t1] = [Math.min(...ts), Math.max(...ts)];
    const [d0, d1] = [Math.min(...ds) - 1, Math.max(...ds) + 1];
    const sx = (t: number) => ((t - t0) / (t1 - t0 || 1)) * (width - 50) + 40;
    const sy = (d: number) => height - 25 - ((d - d0) / (d1 - d0 || 1)) * (height - 40);
    ctx.strokeStyle = '#aaa';
    ctx.beginPath();
    ctx.moveTo(40, sy(0));
    ctx.lineTo(width - 10, sy(0));
    ctx.stroke();
    ctx.fillStyle = '#2a9d2a';
    for (const p of points) {
      ctx.beginPath();
      ctx.arc(sx(p.time), sy(p.disparityArcmin), 2.5, 0, Math.PI * 2);
      ctx.fill();
    }
    ctx.strokeStyle = '#333';
    ctx.setLineDash([6, 4]);
    ctx.beginPath();
    ctx.moveTo(40, sy(estimateArcmin));
    ctx.lineTo(width - 10, sy(estimateArcmin));
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = '#333';
    ctx.fillText(`estimate ${estimateArcmin.toFixed(2)}'`, 45, sy(estimateArcmin) - 5);
  }

  private async renderComparison(runId: string): Promise<void> {
    const bundle = await this.client.compare([runId], this.compareMaster ?? undefined);
    const section = document.createElement('section');
    section.innerHTML = `<h2>Comparison vs ${bundle.reference_id}</h2>
      <div class="panel-grid" id="cmp-grid"></div>`;
    this.resultsEl.appendChild(section);
    const grid = section.querySelector('#cmp-grid')!;
    for (const entry of bundle.entries) {
      const { data, meta } = await this.client.comparePanel(bundle.compare_id, entry.run_id);
      const cell = document.createElement('figure');
      cell.innerHTML = `<canvas></canvas><figcaption>${entry.run_id} − reference (L2 rel ${entry.l2_rel.toFixed(3)})</figcaption>`;
      grid.appendChild(cell);
      const panel = decodePanel(data, { ...meta, shape: [1, ...meta.shape] });
      const { pixels, width, height } = diffToRgba(panel);
      const canvas = cell.querySelector('canvas')!;
      canvas.width = width;
      canvas.height = height;
      canvas.getContext('2d')!.putImageData(new ImageData(pixels, width, height), 0, 0);
    }
  }

  private async refreshRuns(): Promise<void> {
    const { runs } = await this.client.listRuns(12);
    this.runsEl.innerHTML = runs
      .map(
        (r) => `<div class="run-row">
          <code>${r.run_id}</code><span class="status ${r.status.toLowerCase()}">${r.status}</span>
          <span>${r.mode}</span>
          <button data-master="${r.run_id}" ${r.status === 'DONE' && r.mode === 'NON_STEREO' ? '' : 'disabled'}>
            ${this.compareMaster === r.run_id ? 'master ✓' : 'set master'}</button>
        </div>`,
      )
      .join('');
    this.runsEl.querySelectorAll('button[data-master]').forEach((el) =>
      el.addEventListener('click', () => {
        const id = (el as HTMLElement).dataset.master!;
        this.compareMaster = this.compareMaster === id ? null : id;
        void this.refreshRuns();
      }),
    );
  }
}

const rootEl = document.querySelector<HTMLElement>('#app');
if (rootEl) {
  new App().start(rootEl).catch((err) => {
    rootEl.innerHTML = `<p class="errors">failed to reach the prediction service: ${err}</p>`;
  });
}
