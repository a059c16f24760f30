import { describe, expect, it } from 'vitest';

import { ApiClient, FetchLike, filenameFromDisposition } from '../src/api.js';

const jsonResponse = (payload: unknown, status = 200) =>
  new Response(JSON.stringify(payload), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });

describe('ApiClient.validate', () => {
  it('posts the source and returns the body', async () => {
    const calls: Array<{ input: string; init?: RequestInit }> = [];
    const fetchImpl: FetchLike = async (input, init) => {
      calls.push({ input, init });
      return jsonResponse({ valid: true, diagnostics: [] });
    };
    const client = new ApiClient('', fetchImpl);
    const result = await client.validate('thing T {}');
    expect(result).toEqual({ valid: true, diagnostics: [] });
    expect(calls[0].input).toBe('/api/validate');
    expect(JSON.parse(calls[0].init!.body as string)).toEqual(
      { source: 'thing T {}' });
  });

  it('discards a response once a newer request started', async () => {
    let releaseFirst: (r: Response) => void = () => {};
    const first = new Promise<Response>((resolve) => {
      releaseFirst = resolve;
    });
    let call = 0;
    const fetchImpl: FetchLike = async () => {
      call += 1;
      if (call === 1) return first; // stalls until released
      return jsonResponse({ valid: false, diagnostics: [] });
    };
    const client = new ApiClient('', fetchImpl);
    const stale = client.validate('old');
    const fresh = client.validate('new');
    releaseFirst(jsonResponse({ valid: true, diagnostics: [] }));
    expect(await stale).toBeNull();
    expect(await fresh).toEqual({ valid: false, diagnostics: [] });
  });

  it('propagates network failures to the caller', async () => {
    const client = new ApiClient('', async () => {
      throw new Error('connection refused');
    });
    await expect(client.validate('x')).rejects.toThrow('connection refused');
  });
});

describe('ApiClient.generate', () => {
  it('returns zip bytes and the attachment filename on 200', async () => {
    const payload = new Uint8Array([80, 75, 3, 4, 9, 9]);
    const fetchImpl: FetchLike = async () =>
      new Response(payload, {
        status: 200,
        headers: {
          'Content-Type': 'application/zip',
          'Content-Disposition': 'attachment; filename="demo-generated.zip"',
        },
      });
    const client = new ApiClient('', fetchImpl);
    const result = await client.generate('src', 'Main', 'demo');
    expect(result).not.toBeNull();
    expect(result!.kind).toBe('zip');
    if (result!.kind === 'zip') {
      expect(result!.filename).toBe('demo-generated.zip');
      expect(new Uint8Array(result!.data)).toEqual(payload);
    }
  });

  it('surfaces 422 as diagnostics', async () => {
    const diagnostics = [{ severity: 'ERROR', code: 'VAL003',
                           message: 'boom', line: 3, col: 7 }];
    const client = new ApiClient('', async () =>
      jsonResponse({ valid: false, diagnostics }, 422));
    const result = await client.generate('src', 'Main');
    expect(result).toEqual({ kind: 'diagnostics', diagnostics });
  });

  it('surfaces 404 as an error result', async () => {
    const client = new ApiClient('', async () =>
      jsonResponse({ detail: "model has no configuration 'X'" }, 404));
    const result = await client.generate('src', 'X');
    expect(result).toEqual({ kind: 'error', status: 404,
                             detail: "model has no configuration 'X'" });
  });

  it('discards a superseded generate', async () => {
    let release: (r: Response) => void = () => {};
    const gate = new Promise<Response>((resolve) => { release = resolve; });
    let call = 0;
    const client = new ApiClient('', async () => {
      call += 1;
      return call === 1 ? gate : jsonResponse({ detail: 'x' }, 404);
    });
    const stale = client.generate('a', 'Main');
    const fresh = client.generate('b', 'Main');
    release(new Response(new Uint8Array([1]), { status: 200 }));
    expect(await stale).toBeNull();
    expect((await fresh)!.kind).toBe('error');
  });

  it('omits the name field when not provided', async () => {
    let seenBody = '';
    const client = new ApiClient('', async (_input, init) => {
      seenBody = init!.body as string;
      return jsonResponse({ detail: 'x' }, 404);
    });
    await client.generate('s', 'Main');
    expect(Object.keys(JSON.parse(seenBody))).toEqual(['source', 'config']);
  });
});

describe('filenameFromDisposition', () => {
  it('extracts quoted filenames', () => {
    expect(filenameFromDisposition('attachment; filename="a-b.zip"'))
      .toBe('a-b.zip');
  });
  it('falls back when absent', () => {
    expect(filenameFromDisposition(null)).toBe('generated.zip');
  });
});
