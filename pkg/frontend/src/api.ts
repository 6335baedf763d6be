// REST client for the prediction service. All numbers shown in the UI come
// from these responses; the client computes nothing itself.

import type { CompareBundle, PanelMeta, RunConfig, RunRecord, RunStatus } from './types';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly field?: string,
  ) {
    super(message);
  }
}

async function raiseForStatus(resp: Response): Promise<Response> {
  if (resp.ok) return resp;
  let message = `${resp.status}`;
  let field: string | undefined;
  try {
    const body = await resp.json();
    message = body.message ?? message;
    field = body.field;
  } catch {
    /* non-JSON error body */
  }
  throw new ApiRequestError(message, resp.status, field);
}

export class ApiClient {
  constructor(
    private readonly base: string = '',
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await raiseForStatus(await this.fetchImpl(`${this.base}${path}`));
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.getJson('/health');
  }

  defaults(): Promise<RunConfig> {
    return this.getJson('/defaults');
  }

  async submitRun(config: RunConfig): Promise<string> {
    const resp = await raiseForStatus(
      await this.fetchImpl(`${this.base}/runs`, {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify(config),
      }),
    );
    const body = await resp.json();
    return body.run_id as string;
  }

  getRun(runId: string): Promise<RunRecord> {
    return this.getJson(`/runs/${runId}`);
  }

  listRuns(limit = 20, offset = 0): Promise<{ runs: RunRecord[] }> {
    return this.getJson(`/runs?limit=${limit}&offset=${offset}`);
  }

  panelMeta(runId: string, panel: string): Promise<PanelMeta> {
    return this.getJson(`/runs/${runId}/panels/${panel}`);
  }

  private async getJsonWithAccept<T>(path: string): Promise<T> {
    const resp = await raiseForStatus(
      await this.fetchImpl(`${this.base}${path}`, { headers: { accept: 'application/json' } }),
    );
    return (await resp.json()) as T;
  }

  panelSidecar(runId: string, panel: string): Promise<PanelMeta> {
    return this.getJsonWithAccept(`/runs/${runId}/panels/${panel}`);
  }

  async panelData(runId: string, panel: string): Promise<ArrayBuffer> {
    const resp = await raiseForStatus(
      await this.fetchImpl(`${this.base}/runs/${runId}/panels/${panel}`, {
        headers: { accept: 'application/octet-stream' },
      }),
    );
    return resp.arrayBuffer();
  }

  async artifactText(runId: string, name: string): Promise<string> {
    const resp = await raiseForStatus(
      await this.fetchImpl(`${this.base}/runs/${runId}/artifacts/${name}`),
    );
    return resp.text();
  }

  async compare(runIds: string[], masterId?: string): Promise<CompareBundle> {
    const resp = await raiseForStatus(
      await this.fetchImpl(`${this.base}/compare`, {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ run_ids: runIds, master_id: masterId ?? null }),
      }),
    );
    return (await resp.json()) as CompareBundle;
  }

  async comparePanel(compareId: string, runId: string): Promise<{ data: ArrayBuffer; meta: PanelMeta }> {
    const metaResp = await raiseForStatus(
      await this.fetchImpl(`${this.base}/compare/${compareId}/panels/diff_${runId}`, {
        headers: { accept: 'application/json' },
      }),
    );
    const meta = (await metaResp.json()) as PanelMeta;
    const dataResp = await raiseForStatus(
      await this.fetchImpl(`${this.base}/compare/${compareId}/panels/diff_${runId}`),
    );
    return { data: await dataResp.arrayBuffer(), meta };
  }
}

const TERMINAL: RunStatus[] = ['DONE', 'FAILED'];

export interface PollOptions {
  initialDelayMs?: number;
  maxDelayMs?: number;
  backoff?: number;
  timeoutMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

/** Poll a run until DONE/FAILED with exponential backoff. */
export async function pollRun(
  client: ApiClient,
  runId: string,
  options: PollOptions = {},
): Promise<RunRecord> {
  const {
    initialDelayMs = 250,
    maxDelayMs = 2000,
    backoff = 1.5,
    timeoutMs = 120_000,
    sleep = (ms) => new Promise((resolve) => setTimeout(resolve, ms)),
  } = options;
  const started = Date.now();
  let delay = initialDelayMs;
  for (;;) {
    const record = await client.getRun(runId);
    if (TERMINAL.includes(record.status)) return record;
    if (Date.now() - started > timeoutMs) {
      throw new ApiRequestError(`run ${runId} still ${record.status} after ${timeoutMs} ms`, 408);
    }
    await sleep(delay);
    delay = Math.min(delay * backoff, maxDelayMs);
  }
}
