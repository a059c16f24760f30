// Editor contract, driven against recorded real server responses (fixtures
// exported by scripts/export_frontend_fixtures.py from the live toolchain):
//   1. loading the flagship example and validating shows 0 problems;
//   2. introducing a type error shows VAL003 at the correct line;
//   3. generating downloads a zip byte-identical (checksum) to the CLI's.

import { createHash } from 'node:crypto';
import { readFileSync } from 'node:fs';
import { join } from 'node:path';
import { describe, expect, it } from 'vitest';

import { ApiClient, FetchLike } from '../src/api.js';
import { offsetOf } from '../src/tokens.js';
import {
  applyValidation, diagnosticsStale, editSource, errorCount, initialSession,
  loadExample,
} from '../src/session.js';

const fixturePath = (name: string) => join(__dirname, 'fixtures', name);
const fixture = (name: string) =>
  JSON.parse(readFileSync(fixturePath(name), 'utf-8'));

const flagship = fixture('flagship.json');
const validateOk = fixture('validate-ok.json');
const validateBroken = fixture('validate-val003.json');
const generatedMeta = fixture('generated.json');
const generatedZip = readFileSync(fixturePath('generated.zip'));

/** Replays the recorded server behavior for the fixture sources. */
const recordedServer: FetchLike = async (input, init) => {
  const json = (payload: unknown, status = 200) =>
    new Response(JSON.stringify(payload), { status });
  if (input === '/api/examples') return json([flagship]);
  const body = init?.body ? JSON.parse(init.body as string) : {};
  if (input === '/api/validate') {
    if (body.source === flagship.source) return json(validateOk);
    if (body.source === validateBroken.source) {
      return json(validateBroken.response);
    }
    throw new Error('unrecorded validate request');
  }
  if (input === '/api/generate') {
    if (body.source !== flagship.source) {
      return json(validateBroken.response, 422);
    }
    if (body.config !== 'Main') {
      return json({ detail: `model has no configuration '${body.config}'` },
                  404);
    }
    return new Response(generatedZip, {
      status: 200,
      headers: {
        'Content-Type': 'application/zip',
        'Content-Disposition':
          `attachment; filename="${generatedMeta.filename}"`,
      },
    });
  }
  throw new Error(`unrecorded request: ${input}`);
};

describe('editor contract', () => {
  it('flagship example validates to 0 problems', async () => {
    const client = new ApiClient('', recordedServer);
    const [example] = await client.examples();
    let session = loadExample(initialSession(), example.name, example.source);
    expect(session.selectedExample).toBe('smart-grid-imputation');

    const result = await client.validate(session.source);
    session = applyValidation(session, result!.diagnostics);
    expect(result!.valid).toBe(true);
    expect(errorCount(session)).toBe(0);
    expect(diagnosticsStale(session)).toBe(false);
  });

  it('a type error shows VAL003 at the correct position', async () => {
    const client = new ApiClient('', recordedServer);
    let session = loadExample(initialSession(), flagship.name,
                              flagship.source);
    // the recorded edit: widen an int counter increment into a real
    session = editSource(session, validateBroken.source);
    expect(diagnosticsStale(session)).toBe(false); // nothing validated yet

    const result = await client.validate(session.source);
    session = applyValidation(session, result!.diagnostics);
    expect(result!.valid).toBe(false);
    const diag = session.lastDiagnostics![0];
    expect(diag.code).toBe('VAL003');
    expect(diag.line).toBe(24);
    expect(diag.col).toBe(9);

    // a click on the row places the cursor exactly at the offender
    const offset = offsetOf(session.source, diag.line, diag.col);
    expect(session.source.slice(offset, offset + 7)).toBe('counter');
  });

  it('generate downloads a zip with the CLI checksum', async () => {
    const client = new ApiClient('', recordedServer);
    const result = await client.generate(flagship.source, 'Main',
                                         flagship.name);
    expect(result!.kind).toBe('zip');
    if (result!.kind !== 'zip') return;
    expect(result!.filename).toBe('smart-grid-imputation-generated.zip');
    const digest = createHash('sha256')
      .update(Buffer.from(result!.data)).digest('hex');
    expect(digest).toBe(generatedMeta.sha256);
    expect(result!.data.byteLength).toBe(generatedMeta.bytes);
  });

  it('an invalid model populates diagnostics instead of downloading', async () => {
    const client = new ApiClient('', recordedServer);
    const result = await client.generate(validateBroken.source, 'Main');
    expect(result!.kind).toBe('diagnostics');
    if (result!.kind === 'diagnostics') {
      expect(result!.diagnostics[0].code).toBe('VAL003');
    }
  });

  it('an unknown configuration is reported, not downloaded', async () => {
    const client = new ApiClient('', recordedServer);
    const result = await client.generate(flagship.source, 'Nope');
    expect(result).toEqual({
      kind: 'error', status: 404,
      detail: "model has no configuration 'Nope'",
    });
  });
});
