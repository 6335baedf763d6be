import { describe, expect, it, vi } from 'vitest';

import { ApiClient, ApiRequestError, pollRun } from '../src/api';
import type { RunRecord } from '../src/types';

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

function record(status: RunRecord['status']): RunRecord {
  return {
    run_id: 'r1',
    created_at: 'now',
    status,
    mode: 'NON_STEREO',
    error: null,
    error_kind: null,
    metrics: {},
    panels: [],
  };
}

describe('ApiClient', () => {
  it('submits a run and returns the id', async () => {
    const fetchMock = vi.fn(async (url: string, init?: RequestInit) => {
      expect(url).toBe('/runs');
      expect(init?.method).toBe('POST');
      expect(JSON.parse(init?.body as string).schema_version).toBe(1);
      return jsonResponse({ run_id: 'r42' }, 202);
    });
    const client = new ApiClient('', fetchMock);
    expect(await client.submitRun({ schema_version: 1 } as never)).toBe('r42');
  });

  it('surfaces field-level validation errors', async () => {
    const fetchMock = vi.fn(async () =>
      jsonResponse({ error: 'validation', message: 'bad pixel response', field: 'display.pixel_response_s' }, 422),
    );
    const client = new ApiClient('', fetchMock);
    try {
      await client.submitRun({} as never);
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(ApiRequestError);
      expect((err as ApiRequestError).status).toBe(422);
      expect((err as ApiRequestError).field).toBe('display.pixel_response_s');
    }
  });

  it('requests panel bytes with the octet-stream accept header', async () => {
    const payload = new Float32Array([1, 2, 3]).buffer;
    const fetchMock = vi.fn(async (url: string, init?: RequestInit) => {
      expect((init?.headers as Record<string, string>).accept).toBe('application/octet-stream');
      return new Response(payload, { status: 200 });
    });
    const client = new ApiClient('', fetchMock);
    const buf = await client.panelData('r1', 'sampled_reconstruction');
    expect(new Float32Array(buf)).toEqual(new Float32Array([1, 2, 3]));
  });

  it('posts compare requests with optional master', async () => {
    const fetchMock = vi.fn(async (url: string, init?: RequestInit) => {
      expect(url).toBe('/compare');
      const body = JSON.parse(init?.body as string);
      expect(body.run_ids).toEqual(['a', 'b']);
      expect(body.master_id).toBe('m');
      return jsonResponse({ compare_id: 'c1', reference_id: 'm', entries: [] });
    });
    const client = new ApiClient('', fetchMock);
    const bundle = await client.compare(['a', 'b'], 'm');
    expect(bundle.compare_id).toBe('c1');
  });
});

describe('pollRun', () => {
  it('polls with backoff until DONE', async () => {
    const states: RunRecord['status'][] = ['QUEUED', 'RUNNING', 'RUNNING', 'DONE'];
    let call = 0;
    const fetchMock = vi.fn(async () => jsonResponse(record(states[call++])));
    const delays: number[] = [];
    const client = new ApiClient('', fetchMock);
    const result = await pollRun(client, 'r1', {
      initialDelayMs: 10,
      backoff: 2,
      maxDelayMs: 25,
      sleep: async (ms) => {
        delays.push(ms);
      },
    });
    expect(result.status).toBe('DONE');
    expect(fetchMock).toHaveBeenCalledTimes(4);
    expect(delays).toEqual([10, 20, 25]);
  });

  it('returns FAILED records instead of spinning', async () => {
    const fetchMock = vi.fn(async () => jsonResponse(record('FAILED')));
    const result = await pollRun(new ApiClient('', fetchMock), 'r1', { sleep: async () => {} });
    expect(result.status).toBe('FAILED');
    expect(fetchMock).toHaveBeenCalledTimes(1);
  });

  it('times out on runs stuck in the queue', async () => {
    const fetchMock = vi.fn(async () => jsonResponse(record('QUEUED')));
    await expect(
      pollRun(new ApiClient('', fetchMock), 'r1', { timeoutMs: 0, sleep: async () => {} }),
    ).rejects.toThrow(/still QUEUED/);
  });
});
